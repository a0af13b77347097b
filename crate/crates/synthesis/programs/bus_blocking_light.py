# Description: bus in front of ego vehicle obstructing view of red traffic light

# Get the ego vehicle and buses
ego_vehicle = get_objects_of_category(log_dir, category="EGO_VEHICLE")
buses = get_objects_of_category(log_dir, category="BUS")

# Find buses that are in front of the ego vehicle
# We need to find buses that are directly in front of the ego vehicle within a reasonable distance (20 meters) and with minimal lateral offset
buses_in_front_of_ego = get_objects_in_relative_direction(ego_vehicle, buses, log_dir, direction='forward', min_number=1, within_distance=20, lateral_thresh=3)

# We want buses that are moving in the same direction as the ego vehicle to ensure they're actually in the same lane and potentially blocking the view
buses_in_same_direction = heading_in_relative_direction_to(buses_in_front_of_ego, ego_vehicle, log_dir, direction='same')

# We need buses that are in the same lane as the ego vehicle
buses_in_same_lane = in_same_lane(buses_in_same_direction, ego_vehicle, log_dir)

# These buses are likely to be obstructing the view of traffic lights
# Note: The functions don't directly allow us to determine if a traffic light is being obstructed, but buses directly in front of the ego vehicle in the same lane are the most likely candidates for obstructing the view of traffic lights

output_scenario(buses_in_same_lane, "bus in front of ego vehicle obstructing view of red traffic light", log_dir, output_dir)

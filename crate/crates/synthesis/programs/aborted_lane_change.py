# Strategy:
# 1. Get all vehicles
# 2. Find vehicles that are changing lanes
# 3. Find vehicles that are also changing lanes in the opposite direction shortly after
# 4. This indicates a vehicle that started to change lanes but then went back

# Get all vehicles
vehicles = get_objects_of_category(log_dir, category="VEHICLE")

# Find vehicles that are moving (not stationary)
moving_vehicles = scenario_not(stationary)(vehicles, log_dir)

# Find vehicles that are changing lanes in either direction
lane_changing_vehicles = changing_lanes(moving_vehicles, log_dir)

# Find vehicles that are changing lanes to the left
left_lane_changes = changing_lanes(moving_vehicles, log_dir, direction='left')

# Find vehicles that are changing lanes to the right
right_lane_changes = changing_lanes(moving_vehicles, log_dir, direction='right')

# A vehicle that starts to switch lanes but goes back would show lateral acceleration in one direction followed by lateral acceleration in the opposite direction. We can look for vehicles with significant lateral acceleration in both directions

# Find vehicles with lateral acceleration to the left 
left_accel = has_lateral_acceleration(moving_vehicles, log_dir, min_accel=0.5)

# Find vehicles with lateral acceleration to the right 
right_accel = has_lateral_acceleration(moving_vehicles, log_dir, min_accel=-0.5, max_accel=0)

# Vehicles that have both left and right acceleration patterns are likely the ones that started to change lanes but went back
lane_change_aborted = scenario_and([left_accel, right_accel])
# Output the scenario
output_scenario(lane_change_aborted, description, log_dir, output_dir)

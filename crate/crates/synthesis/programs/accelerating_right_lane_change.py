# Description: accelerating vehicle changing lanes to the right
# First, get all vehicles in the scene
vehicles = get_objects_of_category(log_dir, category="VEHICLE")

# Find vehicles that are accelerating using the accelerating function with a reliable minimum acceleration threshold of 0.65
accelerating_vehicles = accelerating(vehicles, log_dir, min_accel=0.65)

# Find vehicles that are changing lanes to the right. We use the changing_lanes function with direction='right'
right_lane_changes = changing_lanes(vehicles, log_dir, direction='right')

# Now find the intersection of accelerating vehicles and those changing lanes to the right. This gives us vehicles that are both accelerating and changing lanes to the right
accelerating_and_changing_right = scenario_and([accelerating_vehicles, right_lane_changes])

# Output the scenario
output_scenario(accelerating_and_changing_right,
"accelerating vehicle changing lanes to the right",
log_dir, output_dir)

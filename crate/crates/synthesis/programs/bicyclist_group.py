# Description: Group of at least 3 moving bicyclists within 5 meters of each other

# Get all bicyclists from the dataset
bicyclists = get_objects_of_category(log_dir, category="BICYCLIST")

# Filter out stationary bicyclists to get only moving ones
moving_bicyclists = scenario_not(stationary)(bicyclists, log_dir)

# Find bicyclists that have at least 2 other bicyclists within 5 meters (which makes a group of at least 3 bicyclists)
bicyclists_in_groups = near_objects(moving_bicyclists, moving_bicyclists, log_dir, distance_thresh=5, min_objects=2, include_self=False)

# Output the scenario
output_scenario(bicyclists_in_groups, "group of at least 3 moving bicyclists within 5 meters of each other", log_dir, output_dir)

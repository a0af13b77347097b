# Description: vehicle turning left on an intersection
vehicles = get_objects_of_category(log_dir, category="VEHICLE")
turning_left = turning(vehicles, log_dir, direction="left")
on_junction = on_intersection(turning_left, log_dir)
not_parked = scenario_not(stationary)(on_junction, log_dir)
output_scenario(not_parked, description, log_dir, output_dir)

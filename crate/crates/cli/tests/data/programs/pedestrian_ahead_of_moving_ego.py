# Description: pedestrian in front of the moving ego vehicle
ego = get_objects_of_category(log_dir, category="EGO_VEHICLE")
moving_ego = has_velocity(ego, log_dir, min_velocity=1)
peds = get_objects_of_category(log_dir, category="PEDESTRIAN")
ego_with_peds = has_objects_in_relative_direction(moving_ego, peds, log_dir, direction="forward", within_distance=25, lateral_thresh=5)
output_scenario(ego_with_peds, description, log_dir, output_dir)

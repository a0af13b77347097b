//! Object categories and the two super-categories accepted by category queries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! categories {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// An annotated object class. `EgoVehicle` is the injected ego track.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Category {
            $(
                #[serde(rename = $name)]
                $variant,
            )*
        }

        impl Category {
            pub const ALL: &'static [Category] = &[$(Category::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Category::$variant => $name,)*
                }
            }
        }

        impl FromStr for Category {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Category::$variant),)*
                    other => Err(Error::InvalidArgument(format!(
                        "unknown category {other:?}; valid names: {}",
                        CategoryQuery::valid_names().join(", ")
                    ))),
                }
            }
        }
    };
}

categories! {
    RegularVehicle => "REGULAR_VEHICLE",
    Pedestrian => "PEDESTRIAN",
    Bicyclist => "BICYCLIST",
    Motorcyclist => "MOTORCYCLIST",
    WheeledRider => "WHEELED_RIDER",
    Bollard => "BOLLARD",
    ConstructionCone => "CONSTRUCTION_CONE",
    Sign => "SIGN",
    ConstructionBarrel => "CONSTRUCTION_BARREL",
    StopSign => "STOP_SIGN",
    MobilePedestrianCrossingSign => "MOBILE_PEDESTRIAN_CROSSING_SIGN",
    LargeVehicle => "LARGE_VEHICLE",
    Bus => "BUS",
    BoxTruck => "BOX_TRUCK",
    Truck => "TRUCK",
    VehicularTrailer => "VEHICULAR_TRAILER",
    TruckCab => "TRUCK_CAB",
    SchoolBus => "SCHOOL_BUS",
    ArticulatedBus => "ARTICULATED_BUS",
    MessageBoardTrailer => "MESSAGE_BOARD_TRAILER",
    Bicycle => "BICYCLE",
    Motorcycle => "MOTORCYCLE",
    WheeledDevice => "WHEELED_DEVICE",
    Wheelchair => "WHEELCHAIR",
    Stroller => "STROLLER",
    Dog => "DOG",
    OfficialSignaler => "OFFICIAL_SIGNALER",
    TrafficLightTrailer => "TRAFFIC_LIGHT_TRAILER",
    Animal => "ANIMAL",
    RailedVehicle => "RAILED_VEHICLE",
    EgoVehicle => "EGO_VEHICLE",
}

/// Classes covered by the `VEHICLE` super-category.
pub const VEHICLE_CLASSES: &[Category] = &[
    Category::ArticulatedBus,
    Category::BoxTruck,
    Category::Bus,
    Category::EgoVehicle,
    Category::LargeVehicle,
    Category::Motorcycle,
    Category::RailedVehicle,
    Category::RegularVehicle,
    Category::SchoolBus,
    Category::Truck,
    Category::TruckCab,
];

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A category argument as accepted by `get_objects_of_category` / `is_category`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CategoryQuery {
    Any,
    Vehicle,
    Exact(Category),
}

impl CategoryQuery {
    pub fn matches(self, category: Category) -> bool {
        match self {
            CategoryQuery::Any => true,
            CategoryQuery::Vehicle => VEHICLE_CLASSES.contains(&category),
            CategoryQuery::Exact(c) => c == category,
        }
    }

    /// Every concrete class this query expands to.
    pub fn expand(self) -> Vec<Category> {
        Category::ALL.iter().copied().filter(|c| self.matches(*c)).collect()
    }

    pub fn valid_names() -> Vec<&'static str> {
        let mut names = vec!["ANY", "VEHICLE"];
        names.extend(Category::ALL.iter().map(|c| c.name()));
        names
    }
}

impl FromStr for CategoryQuery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ANY" => Ok(CategoryQuery::Any),
            "VEHICLE" => Ok(CategoryQuery::Vehicle),
            other => other.parse().map(CategoryQuery::Exact),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_annotated_classes_plus_ego() {
        assert_eq!(Category::ALL.len(), 31);
        assert!(Category::ALL.contains(&Category::EgoVehicle));
    }

    #[test]
    fn vehicle_expansion_is_exact() {
        let mut got: Vec<&str> = CategoryQuery::Vehicle.expand().iter().map(|c| c.name()).collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                "ARTICULATED_BUS",
                "BOX_TRUCK",
                "BUS",
                "EGO_VEHICLE",
                "LARGE_VEHICLE",
                "MOTORCYCLE",
                "RAILED_VEHICLE",
                "REGULAR_VEHICLE",
                "SCHOOL_BUS",
                "TRUCK",
                "TRUCK_CAB",
            ]
        );
        assert_eq!(CategoryQuery::Any.expand().len(), Category::ALL.len());
    }

    #[test]
    fn unknown_name_lists_valid_names() {
        let err = "UNICORN".parse::<CategoryQuery>().unwrap_err().to_string();
        assert!(err.contains("UNICORN"));
        assert!(err.contains("REGULAR_VEHICLE"));
        assert!(err.contains("ANY"));
    }

    #[test]
    fn names_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), *c);
        }
    }
}

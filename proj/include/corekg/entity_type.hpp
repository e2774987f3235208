#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "corekg/text.hpp"

namespace corekg {

/// The seven entity types of the domain schema, in canonical resolution
/// and extraction order. Untyped is a reserved placeholder for relationship
/// endpoints that never appeared as an extracted entity.
enum class EntityType {
    Person,
    Location,
    Routes,
    Organization,
    MeansOfTransportation,
    MeansOfCommunication,
    SmuggledItems,
    Untyped,
};

inline constexpr std::array<EntityType, 7> kCanonicalTypeOrder = {
    EntityType::Person,
    EntityType::Location,
    EntityType::Routes,
    EntityType::Organization,
    EntityType::MeansOfTransportation,
    EntityType::MeansOfCommunication,
    EntityType::SmuggledItems,
};

inline std::string_view type_name(EntityType t) {
    switch (t) {
        case EntityType::Person: return "PERSON";
        case EntityType::Location: return "LOCATION";
        case EntityType::Routes: return "ROUTES";
        case EntityType::Organization: return "ORGANIZATION";
        case EntityType::MeansOfTransportation: return "MEANS OF TRANSPORTATION";
        case EntityType::MeansOfCommunication: return "MEANS OF COMMUNICATION";
        case EntityType::SmuggledItems: return "SMUGGLED ITEMS";
        case EntityType::Untyped: return "UNTYPED";
    }
    return "UNTYPED";
}

/// Filesystem-safe lowercase tag, used in artifact file names.
inline std::string_view type_tag(EntityType t) {
    switch (t) {
        case EntityType::Person: return "person";
        case EntityType::Location: return "location";
        case EntityType::Routes: return "routes";
        case EntityType::Organization: return "organization";
        case EntityType::MeansOfTransportation: return "means_of_transportation";
        case EntityType::MeansOfCommunication: return "means_of_communication";
        case EntityType::SmuggledItems: return "smuggled_items";
        case EntityType::Untyped: return "untyped";
    }
    return "untyped";
}

/// Parses a type string case-insensitively, ignoring spaces and underscores.
inline std::optional<EntityType> parse_entity_type(std::string_view s) {
    std::string key;
    for (char c : s) {
        if (c == ' ' || c == '_' || c == '-') continue;
        key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (key == "PERSON") return EntityType::Person;
    if (key == "LOCATION") return EntityType::Location;
    if (key == "ROUTES" || key == "ROUTE") return EntityType::Routes;
    if (key == "ORGANIZATION") return EntityType::Organization;
    if (key == "MEANSOFTRANSPORTATION") return EntityType::MeansOfTransportation;
    if (key == "MEANSOFCOMMUNICATION") return EntityType::MeansOfCommunication;
    if (key == "SMUGGLEDITEMS" || key == "SMUGGLEDITEM") return EntityType::SmuggledItems;
    if (key == "UNTYPED") return EntityType::Untyped;
    return std::nullopt;
}

}  // namespace corekg

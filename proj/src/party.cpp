#include "qkdsim/party.hpp"

namespace qkdsim {

std::string to_string(Role r) {
    switch (r) {
        case Role::alice: return "alice";
        case Role::bob: return "bob";
        case Role::eve: return "eve";
        case Role::kdc: return "kdc";
    }
    return "unknown";
}

std::optional<Role> parse_role(std::string_view name) {
    if (name == "alice") return Role::alice;
    if (name == "bob") return Role::bob;
    if (name == "eve") return Role::eve;
    if (name == "kdc") return Role::kdc;
    return std::nullopt;
}

}  // namespace qkdsim

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace qkdsim {

enum class Role { alice, bob, eve, kdc };

std::string to_string(Role r);
std::optional<Role> parse_role(std::string_view name);

}  // namespace qkdsim

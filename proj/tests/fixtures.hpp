#ifndef NURA_TEST_FIXTURES_HPP
#define NURA_TEST_FIXTURES_HPP

#include <string>
#include <vector>

#include "nura/scenario.hpp"
#include "nura/utility.hpp"

namespace fixtures {

inline const nura::UserProfile& ue(std::size_t i) {
  static const std::vector<nura::UserProfile> users = nura::reference_scenario().users;
  return users.at(i);
}

inline std::vector<nura::UserProfile> reference_users() { return nura::reference_scenario().users; }

inline std::string source_path(const std::string& rel) { return std::string(NURA_SOURCE_DIR) + "/" + rel; }

/// Single-app user with weight 1.
inline nura::UserProfile single(std::string id, nura::UserClass cls, nura::UtilityFunction u,
                                std::optional<double> target = std::nullopt) {
  return nura::UserProfile{std::move(id), cls, 1.0, {nura::Application{u, 1.0, target}}};
}

}  // namespace fixtures

#endif

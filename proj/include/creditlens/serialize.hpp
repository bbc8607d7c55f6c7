#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "creditlens/mdp.hpp"

namespace creditlens {

struct LoadedModel {
  Mdp mdp;
  std::optional<TabularPolicy> policy;
};

// JSON schema: num_states, num_actions, horizon, discount, initial_dist[S],
// reward[S][A], transition[S][A][S], optional policy[H][S][A], optional
// labels[S]. Numbers round-trip at full double precision.
//
// load_mdp throws SchemaError for malformed/missing fields (naming the field)
// and ValidationError when the parsed model fails validate_mdp/validate_policy.
LoadedModel load_mdp(const std::filesystem::path& path);
LoadedModel parse_model(const std::string& text, const std::string& origin);

std::string model_to_json(const Mdp& m, const TabularPolicy* policy = nullptr);
void save_mdp(const std::filesystem::path& path, const Mdp& m,
              const TabularPolicy* policy = nullptr);

// Stable content hash of the serialized model/policy (FNV-1a over the JSON).
std::string mdp_hash(const Mdp& m);
std::string policy_hash(const TabularPolicy& p);

}  // namespace creditlens

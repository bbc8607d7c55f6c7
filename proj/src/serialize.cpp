#include "creditlens/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "creditlens/io_util.hpp"
#include "creditlens/numeric.hpp"

namespace creditlens {

namespace {

using json = nlohmann::ordered_json;

std::string element(const std::string& base, std::initializer_list<int> idx) {
  std::ostringstream os;
  os << base;
  for (int i : idx) os << '[' << i << ']';
  return os.str();
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw SchemaError(key, "missing required field");
  return doc.at(key);
}

int require_int(const json& doc, const char* key) {
  const json& v = require(doc, key);
  if (!v.is_number_integer()) throw SchemaError(key, "must be an integer");
  return v.get<int>();
}

double require_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "must be a number");
  return v.get<double>();
}

const json& require_array(const json& v, const std::string& field,
                          std::size_t size) {
  if (!v.is_array()) throw SchemaError(field, "must be an array");
  if (v.size() != size) {
    std::ostringstream os;
    os << "must have " << size << " entries, found " << v.size();
    throw SchemaError(field, os.str());
  }
  return v;
}

}  // namespace

LoadedModel parse_model(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(origin, std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError(origin, "top level must be an object");

  Mdp m;
  m.num_states = require_int(doc, "num_states");
  m.num_actions = require_int(doc, "num_actions");
  m.horizon = require_int(doc, "horizon");
  const json& disc = require(doc, "discount");
  m.discount = require_number(disc, "discount");
  if (m.num_states < 1) throw SchemaError("num_states", "must be >= 1");
  if (m.num_actions < 1) throw SchemaError("num_actions", "must be >= 1");
  if (m.horizon < 1) throw SchemaError("horizon", "must be >= 1");

  const int S = m.num_states;
  const int A = m.num_actions;
  const int H = m.horizon;

  {
    const json& arr = require_array(require(doc, "initial_dist"),
                                    "initial_dist", S);
    m.initial_dist.reserve(S);
    for (int s = 0; s < S; ++s) {
      m.initial_dist.push_back(
          require_number(arr[s], element("initial_dist", {s})));
    }
  }
  {
    const json& rows = require_array(require(doc, "reward"), "reward", S);
    m.reward.reserve(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s) {
      const json& row = require_array(rows[s], element("reward", {s}), A);
      for (int a = 0; a < A; ++a) {
        m.reward.push_back(require_number(row[a], element("reward", {s, a})));
      }
    }
  }
  {
    const json& cube = require_array(require(doc, "transition"), "transition",
                                     S);
    m.transition.reserve(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s) {
      const json& rows = require_array(cube[s], element("transition", {s}), A);
      for (int a = 0; a < A; ++a) {
        const json& row =
            require_array(rows[a], element("transition", {s, a}), S);
        for (int s2 = 0; s2 < S; ++s2) {
          m.transition.push_back(
              require_number(row[s2], element("transition", {s, a, s2})));
        }
      }
    }
  }
  if (doc.contains("labels")) {
    const json& arr = require_array(doc.at("labels"), "labels", S);
    for (int s = 0; s < S; ++s) {
      if (!arr[s].is_string()) {
        throw SchemaError(element("labels", {s}), "must be a string");
      }
      m.labels.push_back(arr[s].get<std::string>());
    }
  }

  LoadedModel loaded;
  if (doc.contains("policy")) {
    TabularPolicy p;
    p.num_states = S;
    p.num_actions = A;
    p.horizon = H;
    const json& steps = require_array(doc.at("policy"), "policy", H);
    p.probs.reserve(static_cast<std::size_t>(H) * S * A);
    for (int h = 0; h < H; ++h) {
      const json& rows = require_array(steps[h], element("policy", {h}), S);
      for (int s = 0; s < S; ++s) {
        const json& row = require_array(rows[s], element("policy", {h, s}), A);
        for (int a = 0; a < A; ++a) {
          p.probs.push_back(
              require_number(row[a], element("policy", {h, s, a})));
        }
      }
    }
    loaded.policy = std::move(p);
  }

  auto violations = validate_mdp(m);
  if (loaded.policy) {
    auto more = validate_policy(*loaded.policy, m);
    violations.insert(violations.end(), more.begin(), more.end());
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));

  loaded.mdp = std::move(m);
  return loaded;
}

LoadedModel load_mdp(const std::filesystem::path& path) {
  return parse_model(read_file(path.string()), path.string());
}

std::string model_to_json(const Mdp& m, const TabularPolicy* policy) {
  json doc;
  doc["num_states"] = m.num_states;
  doc["num_actions"] = m.num_actions;
  doc["horizon"] = m.horizon;
  doc["discount"] = m.discount;
  doc["initial_dist"] = m.initial_dist;

  json reward = json::array();
  for (int s = 0; s < m.num_states; ++s) {
    json row = json::array();
    for (int a = 0; a < m.num_actions; ++a) row.push_back(m.reward_at(s, a));
    reward.push_back(std::move(row));
  }
  doc["reward"] = std::move(reward);

  json transition = json::array();
  for (int s = 0; s < m.num_states; ++s) {
    json rows = json::array();
    for (int a = 0; a < m.num_actions; ++a) {
      const auto span = m.transition_row(s, a);
      rows.push_back(json(std::vector<double>(span.begin(), span.end())));
    }
    transition.push_back(std::move(rows));
  }
  doc["transition"] = std::move(transition);

  if (!m.labels.empty()) doc["labels"] = m.labels;

  if (policy != nullptr) {
    json steps = json::array();
    for (int h = 0; h < policy->horizon; ++h) {
      json rows = json::array();
      for (int s = 0; s < policy->num_states; ++s) {
        const auto span = policy->row(h, s);
        rows.push_back(json(std::vector<double>(span.begin(), span.end())));
      }
      steps.push_back(std::move(rows));
    }
    doc["policy"] = std::move(steps);
  }
  return doc.dump(2) + "\n";
}

void save_mdp(const std::filesystem::path& path, const Mdp& m,
              const TabularPolicy* policy) {
  atomic_write_file(path.string(), model_to_json(m, policy));
}

namespace {

std::string hex_hash(const std::string& text) {
  const std::uint64_t h = fnv1a(text.data(), text.size());
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace

std::string mdp_hash(const Mdp& m) { return hex_hash(model_to_json(m)); }

std::string policy_hash(const TabularPolicy& p) {
  json steps = json::array();
  for (int h = 0; h < p.horizon; ++h) {
    json rows = json::array();
    for (int s = 0; s < p.num_states; ++s) {
      const auto span = p.row(h, s);
      rows.push_back(json(std::vector<double>(span.begin(), span.end())));
    }
    steps.push_back(std::move(rows));
  }
  return hex_hash(steps.dump());
}

}  // namespace creditlens

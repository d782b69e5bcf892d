#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "assortgen/error.hpp"
#include "assortgen/generators.hpp"
#include "assortgen/train.hpp"

namespace assortgen {

inline constexpr int kConfigSchemaVersion = 1;

/// Reads fields from a JSON object and rejects keys that were never read.
class StrictObject {
public:
  StrictObject(const nlohmann::json& j, std::string where);

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    if (!j_.contains(key)) return fallback;
    return require<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw Error(ErrorKind::Config, where_ + ": missing key '" + key + "'");
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::Config, where_ + ": bad value for '" + key + "'");
    }
  }

  StrictObject child(const std::string& key);
  const nlohmann::json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  /// Throws Config naming the first unknown key.
  void finish() const;

private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> used_;
};

/// Parses a file and checks the top-level schema_version. Throws Config.
nlohmann::json load_config_file(const std::string& path);

/// Field readers; each consumes a JSON object strictly.
ModelSpec parse_model_spec(const nlohmann::json& j, const ModelSpec& defaults = {});
void parse_train_config(const nlohmann::json& j, TrainConfig& cfg);

nlohmann::json to_json(const ModelSpec& spec);

}  // namespace assortgen

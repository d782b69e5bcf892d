#include "assortgen/config.hpp"

#include <fstream>

namespace assortgen {

StrictObject::StrictObject(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
  if (!j_.is_object()) throw Error(ErrorKind::Config, where_ + ": expected an object");
}

StrictObject StrictObject::child(const std::string& key) {
  used_.insert(key);
  return StrictObject(j_.at(key), where_ + "." + key);
}

void StrictObject::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!used_.contains(key)) throw Error(ErrorKind::Config, where_ + ": unknown key '" + key + "'");
  }
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version")) throw Error(ErrorKind::Config, path + ": missing schema_version");
  if (j["schema_version"] != kConfigSchemaVersion) {
    throw Error(ErrorKind::Config, path + ": unsupported schema_version " + j["schema_version"].dump());
  }
  return j;
}

ModelSpec parse_model_spec(const nlohmann::json& j, const ModelSpec& defaults) {
  StrictObject o(j, "model");
  ModelSpec s = defaults;
  try {
    if (o.has("family")) s.family = family_from_string(o.require<std::string>("family"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  }
  s.n = o.get("n", s.n);
  s.mean_degree = o.get("mean_degree", s.mean_degree);
  if (o.has("num_edges")) s.num_edges = o.require<std::size_t>("num_edges");
  s.rewire_p = o.get("rewire_p", s.rewire_p);
  s.num_blocks = o.get("num_blocks", s.num_blocks);
  s.block_ratio = o.get("block_ratio", s.block_ratio);
  s.cl_gamma = o.get("cl_gamma", s.cl_gamma);
  s.triad_p = o.get("triad_p", s.triad_p);
  o.finish();
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("model: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const ModelSpec& s) {
  nlohmann::json j = {{"family", std::string(to_string(s.family))},
                      {"n", s.n},
                      {"mean_degree", s.mean_degree},
                      {"rewire_p", s.rewire_p},
                      {"num_blocks", s.num_blocks},
                      {"block_ratio", s.block_ratio},
                      {"cl_gamma", s.cl_gamma},
                      {"triad_p", s.triad_p}};
  if (s.num_edges) j["num_edges"] = *s.num_edges;
  return j;
}

void parse_train_config(const nlohmann::json& j, TrainConfig& c) {
  StrictObject o(j, "train");
  if (o.has("reward")) {
    StrictObject r = o.child("reward");
    c.reward.zeta = r.get("zeta", c.reward.zeta);
    c.reward.step_penalty = r.get("step_penalty", c.reward.step_penalty);
    c.reward.success_bonus = r.get("success_bonus", c.reward.success_bonus);
    c.reward.gamma = r.get("gamma", c.reward.gamma);
    r.finish();
  }
  if (o.has("ppo")) {
    StrictObject p = o.child("ppo");
    c.ppo.clip = p.get("clip", c.ppo.clip);
    c.ppo.learning_rate = p.get("learning_rate", c.ppo.learning_rate);
    c.ppo.epochs = p.get("epochs", c.ppo.epochs);
    c.ppo.minibatch = p.get("minibatch", c.ppo.minibatch);
    c.ppo.gae_lambda = p.get("gae_lambda", c.ppo.gae_lambda);
    c.ppo.entropy_coef = p.get("entropy_coef", c.ppo.entropy_coef);
    c.ppo.value_coef = p.get("value_coef", c.ppo.value_coef);
    c.ppo.max_grad_norm = p.get("max_grad_norm", c.ppo.max_grad_norm);
    p.finish();
  }
  if (o.has("architecture")) {
    StrictObject a = o.child("architecture");
    c.arch.layers = a.get("layers", c.arch.layers);
    c.arch.hidden = a.get("hidden", c.arch.hidden);
    c.arch.gap_scale = a.get("gap_scale", c.arch.gap_scale);
    c.arch.value_scale = a.get("value_scale", c.arch.value_scale);
    a.finish();
  }
  if (o.has("mask")) {
    StrictObject m = o.child("mask");
    c.mask.exact = m.get("exact", c.mask.exact);
    c.mask.probes = m.get("probes", c.mask.probes);
    m.finish();
  }
  if (o.has("domain")) {
    StrictObject d = o.child("domain");
    if (d.has("families")) {
      c.domain.families.clear();
      for (const auto& f : d.require<std::vector<std::string>>("families")) {
        try {
          c.domain.families.push_back(family_from_string(f));
        } catch (const Error& e) {
          throw Error(ErrorKind::Config, std::string("train.domain: ") + e.what());
        }
      }
    }
    c.domain.n_min = d.get("n_min", c.domain.n_min);
    c.domain.n_max = d.get("n_max", c.domain.n_max);
    c.domain.k_min = d.get("k_min", c.domain.k_min);
    c.domain.k_max = d.get("k_max", c.domain.k_max);
    c.domain.rho_min = d.get("rho_min", c.domain.rho_min);
    c.domain.rho_max = d.get("rho_max", c.domain.rho_max);
    c.domain.rho_abs_min = d.get("rho_abs_min", c.domain.rho_abs_min);
    c.domain.epsilon = d.get("epsilon", c.domain.epsilon);
    c.domain.target_margin = d.get("target_margin", c.domain.target_margin);
    d.finish();
  }
  c.rollout_steps = o.get("rollout_steps", c.rollout_steps);
  c.total_steps = o.get("total_steps", c.total_steps);
  c.step_cap_per_edge = o.get("step_cap_per_edge", c.step_cap_per_edge);
  c.num_envs = o.get("num_envs", c.num_envs);
  c.eval_interval = o.get("eval_interval", c.eval_interval);
  c.probe_episodes = o.get("probe_episodes", c.probe_episodes);
  c.stop_success_rate = o.get("stop_success_rate", c.stop_success_rate);
  c.divergence_steps = o.get("divergence_steps", c.divergence_steps);
  o.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("train: ") + e.what());
  }
}

}  // namespace assortgen

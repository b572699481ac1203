#include "lulc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "lulc/error.hpp"
#include "lulc/io.hpp"
#include "lulc/seed_grid.hpp"

namespace lulc {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"seed", "out_dir", "workers", "checkpoint_every"}},
      {"grid", {"path", "frozen_mask"}},
      {"runoff", {"coefficients", "rainfall_intensity_mm_hr"}},
      {"coefficients",
       {"water", "urban", "barren", "forest", "grassland", "agriculture", "wetland"}},
      {"env",
       {"steps_per_episode", "target_reduction_m3_per_s", "target_bonus", "reward_scale",
        "frozen_classes"}},
      {"ppo",
       {"gamma", "gae_lambda", "clip_epsilon", "epochs_per_update", "minibatch_size",
        "rollout_horizon", "value_coef", "entropy_coef", "learning_rate", "total_updates"}},
      {"evaluate", {"steps"}},
  };
  return keys;
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) node_ = &*child;
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (!node_) return std::nullopt;
    auto v = node_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return std::string(trim(*v));
  }

  template <typename Fn>
  auto wrap(const std::string& key, Fn&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      bad(key, e.what());
    }
  }

  void real(const std::string& key, double& out) const {
    if (auto v = raw(key)) out = wrap(key, [&] { return parse_double(*v); });
  }

  void integer(const std::string& key, int& out) const {
    if (auto v = raw(key)) {
      const auto x = wrap(key, [&] { return parse_int(*v); });
      if (x < INT32_MIN || x > INT32_MAX) bad(key, "out of range");
      out = static_cast<int>(x);
    }
  }

  void path(const std::string& key, std::filesystem::path& out,
            const std::filesystem::path& base) const {
    if (auto v = raw(key)) {
      out = v->empty() ? std::filesystem::path{} : base / std::filesystem::path(*v);
      out = out.lexically_normal();
    }
  }

  [[noreturn]] void bad(const std::string& key, const std::string& why) const {
    fail(ErrorKind::kConfig, "config [" + name_ + "] " + key + ": " + why);
  }

 private:
  std::string name_;
  const pt::ptree* node_ = nullptr;
};

std::vector<LulcClass> parse_class_list(const Section& s, const std::string& key,
                                        std::string_view text) {
  std::vector<LulcClass> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto name = trim(text.substr(start, end - start));
    start = end + 1;
    if (name.empty()) continue;
    const auto c = class_from_name(name);
    if (!c) s.bad(key, "unknown class '" + std::string(name) + "'");
    out.push_back(*c);
  }
  return out;
}

std::string path_string(const std::filesystem::path& p) { return p.generic_string(); }

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::kConfig, std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, node] : root) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      fail(ErrorKind::kConfig, "config: unknown section [" + section + "]");
    }
    if (node.empty() && !node.data().empty()) {
      fail(ErrorKind::kConfig, "config: key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : node) {
      if (!it->second.contains(key)) {
        fail(ErrorKind::kConfig, "config [" + section + "]: unknown key '" + key + "'");
      }
    }
  }

  RunConfig cfg;
  const Section run(root, "run");
  if (auto seed = run.raw("seed")) {
    const auto* first = seed->data();
    const auto* last = first + seed->size();
    auto [ptr, ec] = std::from_chars(first, last, cfg.ppo.seed);
    if (ec != std::errc{} || ptr != last) run.bad("seed", "expected an unsigned 64-bit integer");
  }
  run.path("out_dir", cfg.out_dir, base_dir);
  run.integer("workers", cfg.ppo.workers);
  run.integer("checkpoint_every", cfg.checkpoint_every);
  if (cfg.checkpoint_every < 0) run.bad("checkpoint_every", "must be >= 0");

  const Section grid(root, "grid");
  grid.path("path", cfg.grid_path, base_dir);
  grid.path("frozen_mask", cfg.frozen_mask_path, base_dir);

  const Section runoff(root, "runoff");
  runoff.path("coefficients", cfg.coefficients_path, base_dir);
  runoff.real("rainfall_intensity_mm_hr", cfg.coefficients.intensity_mm_per_hr);

  const Section coeff(root, "coefficients");
  for (const auto c : kAllClasses) {
    coeff.real(std::string(class_name(c)), cfg.coefficients.c[index_of(c)]);
  }

  const Section env(root, "env");
  env.integer("steps_per_episode", cfg.env.steps_per_episode);
  env.real("target_reduction_m3_per_s", cfg.env.target_reduction_m3_per_s);
  env.real("target_bonus", cfg.env.target_bonus);
  env.real("reward_scale", cfg.env.reward_scale);
  if (auto v = env.raw("frozen_classes")) {
    cfg.env.frozen_classes = parse_class_list(env, "frozen_classes", *v);
  }

  const Section ppo(root, "ppo");
  ppo.real("gamma", cfg.ppo.gamma);
  ppo.real("gae_lambda", cfg.ppo.gae_lambda);
  ppo.real("clip_epsilon", cfg.ppo.clip_epsilon);
  ppo.integer("epochs_per_update", cfg.ppo.epochs_per_update);
  ppo.integer("minibatch_size", cfg.ppo.minibatch_size);
  ppo.integer("rollout_horizon", cfg.ppo.rollout_horizon);
  ppo.real("value_coef", cfg.ppo.value_coef);
  ppo.real("entropy_coef", cfg.ppo.entropy_coef);
  ppo.real("learning_rate", cfg.ppo.learning_rate);
  ppo.integer("total_updates", cfg.ppo.total_updates);

  const Section eval(root, "evaluate");
  eval.integer("steps", cfg.evaluate_steps);
  if (cfg.evaluate_steps < 0) eval.bad("steps", "must be >= 0");

  try {
    cfg.env.validate();
    cfg.ppo.validate();
    if (cfg.coefficients_path.empty()) cfg.coefficients.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorKind::kConfig, "config file not found: " + path.string());
  }
  return parse_run_config(read_text_file(path), path.parent_path());
}

std::string format_run_config(const RunConfig& cfg) {
  std::ostringstream o;
  o << "# lulc-ppo run configuration\n\n"
    << "[run]\nseed = " << cfg.ppo.seed << "\nout_dir = " << path_string(cfg.out_dir)
    << "\nworkers = " << cfg.ppo.workers << "\ncheckpoint_every = " << cfg.checkpoint_every
    << "\n\n[grid]\n# empty path: bundled 25x40 seed grid\npath = "
    << path_string(cfg.grid_path) << "\nfrozen_mask = " << path_string(cfg.frozen_mask_path)
    << "\n\n[runoff]\n# empty: use the [coefficients] section\ncoefficients = "
    << path_string(cfg.coefficients_path)
    << "\nrainfall_intensity_mm_hr = " << format_double(cfg.coefficients.intensity_mm_per_hr)
    << "\n\n[coefficients]\n";
  for (const auto c : kAllClasses) {
    o << class_name(c) << " = " << format_double(cfg.coefficients[c]) << "\n";
  }
  o << "\n[env]\n# 0: one step per pixel\nsteps_per_episode = " << cfg.env.steps_per_episode
    << "\ntarget_reduction_m3_per_s = " << format_double(cfg.env.target_reduction_m3_per_s)
    << "\ntarget_bonus = " << format_double(cfg.env.target_bonus)
    << "\nreward_scale = " << format_double(cfg.env.reward_scale) << "\nfrozen_classes = ";
  for (std::size_t i = 0; i < cfg.env.frozen_classes.size(); ++i) {
    o << (i ? "," : "") << class_name(cfg.env.frozen_classes[i]);
  }
  const auto& p = cfg.ppo;
  o << "\n\n[ppo]\ngamma = " << format_double(p.gamma)
    << "\ngae_lambda = " << format_double(p.gae_lambda)
    << "\nclip_epsilon = " << format_double(p.clip_epsilon)
    << "\nepochs_per_update = " << p.epochs_per_update
    << "\nminibatch_size = " << p.minibatch_size
    << "\nrollout_horizon = " << p.rollout_horizon
    << "\nvalue_coef = " << format_double(p.value_coef)
    << "\nentropy_coef = " << format_double(p.entropy_coef)
    << "\nlearning_rate = " << format_double(p.learning_rate)
    << "\ntotal_updates = " << p.total_updates
    << "\n\n[evaluate]\n# 0: one step per pixel\nsteps = " << cfg.evaluate_steps << "\n";
  return o.str();
}

void validate_paths(const RunConfig& cfg) {
  for (const auto* p : {&cfg.grid_path, &cfg.frozen_mask_path, &cfg.coefficients_path}) {
    if (!p->empty() && !std::filesystem::exists(*p)) {
      fail(ErrorKind::kConfig, "file not found: " + p->string());
    }
  }
  if (cfg.grid_path.empty() && !cfg.frozen_mask_path.empty()) {
    fail(ErrorKind::kConfig, "frozen_mask requires an explicit grid path");
  }
}

LulcGrid load_grid(const RunConfig& cfg) {
  validate_paths(cfg);
  if (cfg.grid_path.empty()) return make_seed_grid();
  return read_grid_with_mask(cfg.grid_path, cfg.frozen_mask_path);
}

CoefficientTable load_coefficients(const RunConfig& cfg) {
  validate_paths(cfg);
  if (cfg.coefficients_path.empty()) return cfg.coefficients;
  return read_coefficients_csv(cfg.coefficients_path, cfg.coefficients.intensity_mm_per_hr);
}

}  // namespace lulc

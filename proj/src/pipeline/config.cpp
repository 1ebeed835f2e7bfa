#include "klan/pipeline/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "klan/error.hpp"
#include "klan/rng.hpp"

namespace klan::pipeline {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad_line(const std::string& file, int line, const std::string& what) {
  std::ostringstream os;
  os << file << ":" << line << ": " << what;
  throw DataError(os.str());
}

double parse_double(const std::string& file, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) bad_line(file, line, "trailing characters in number '" + v + "'");
    return x;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    bad_line(file, line, "expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& file, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) bad_line(file, line, "trailing characters in integer '" + v + "'");
    if (x < -2147483647L || x > 2147483647L) bad_line(file, line, "integer out of range");
    return static_cast<int>(x);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    bad_line(file, line, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& file, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) bad_line(file, line, "trailing characters in integer '" + v + "'");
    return static_cast<std::uint64_t>(x);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    bad_line(file, line, "expected a non-negative integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& file, int line, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_line(file, line, "expected true/false, got '" + v + "'");
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open config file: " + file);

  RunConfig cfg;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // comments run to end of line
    std::size_t cut = raw.find_first_of("#;");
    std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') bad_line(file, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "sim" && section != "isp" && section != "iit" && section != "am" &&
          section != "experiment") {
        bad_line(file, line, "unknown section [" + section + "]");
      }
      continue;
    }

    std::size_t eq = s.find('=');
    if (eq == std::string::npos) bad_line(file, line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) bad_line(file, line, "empty key");
    if (val.empty()) bad_line(file, line, "empty value for '" + key + "'");
    if (section.empty()) bad_line(file, line, "key '" + key + "' outside any section");

    bool known = true;
    if (section == "sim") {
      auto& c = cfg.sim;
      if (key == "pages") c.pages = parse_int(file, line, val);
      else if (key == "users") c.users = parse_int(file, line, val);
      else if (key == "seed") c.seed = parse_u64(file, line, val);
      else if (key == "single_page_fraction") c.single_page_fraction = parse_double(file, line, val);
      else if (key == "multi_entry_prob") c.multi_entry_prob = parse_double(file, line, val);
      else if (key == "noise_std") c.noise_std = parse_double(file, line, val);
      else if (key == "w_static") c.w_static = parse_double(file, line, val);
      else if (key == "w_dynamic") c.w_dynamic = parse_double(file, line, val);
      else if (key == "drift_prob") c.drift_prob = parse_double(file, line, val);
      else if (key == "trigger_prob") c.trigger_prob = parse_double(file, line, val);
      else if (key == "days") c.days = parse_int(file, line, val);
      else if (key == "switch_rate") c.switch_rate = parse_double(file, line, val);
      else if (key == "drop_threshold") c.drop_threshold = parse_double(file, line, val);
      else if (key == "volatility_scale") c.volatility_scale = parse_double(file, line, val);
      else known = false;
    } else if (section == "isp") {
      auto& c = cfg.isp;
      if (key == "experts") c.experts = parse_int(file, line, val);
      else if (key == "embed_dim") c.embed_dim = parse_int(file, line, val);
      else if (key == "expert_hidden") c.expert_hidden = parse_int(file, line, val);
      else if (key == "tower_hidden") c.tower_hidden = parse_int(file, line, val);
      else if (key == "kl_weight") c.kl_weight = parse_double(file, line, val);
      else if (key == "lr") c.lr = parse_double(file, line, val);
      else if (key == "epochs") c.epochs = parse_int(file, line, val);
      else if (key == "batch_size") c.batch_size = parse_int(file, line, val);
      else if (key == "max_steps") c.max_steps = parse_int(file, line, val);
      else if (key == "seed") c.seed = parse_u64(file, line, val);
      else known = false;
    } else if (section == "iit") {
      auto& c = cfg.iit;
      if (key == "hidden") c.hidden = parse_int(file, line, val);
      else if (key == "gamma") c.gamma = parse_double(file, line, val);
      else if (key == "alpha") c.alpha = parse_double(file, line, val);
      else if (key == "beta") c.beta = parse_double(file, line, val);
      else if (key == "dynamic_alpha") c.dynamic_alpha = parse_bool(file, line, val);
      else if (key == "lr") c.lr = parse_double(file, line, val);
      else if (key == "batch_size") c.batch_size = parse_int(file, line, val);
      else if (key == "steps") c.steps = parse_int(file, line, val);
      else if (key == "target_sync") c.target_sync = parse_int(file, line, val);
      else if (key == "seed") c.seed = parse_u64(file, line, val);
      else known = false;
    } else if (section == "am") {
      auto& c = cfg.am;
      if (key == "experts") c.experts = parse_int(file, line, val);
      else if (key == "expert_hidden") c.expert_hidden = parse_int(file, line, val);
      else if (key == "lr") c.lr = parse_double(file, line, val);
      else if (key == "epochs") c.epochs = parse_int(file, line, val);
      else if (key == "batch_size") c.batch_size = parse_int(file, line, val);
      else if (key == "max_steps") c.max_steps = parse_int(file, line, val);
      else if (key == "seed") c.seed = parse_u64(file, line, val);
      else known = false;
    } else {  // experiment
      auto& c = cfg.experiment;
      if (key == "history_days") c.history_days = parse_int(file, line, val);
      else if (key == "rct_window_days") c.rct_window_days = parse_int(file, line, val);
      else if (key == "emit_from_day") c.emit_from_day = parse_int(file, line, val);
      else if (key == "train_fraction") c.train_fraction = parse_double(file, line, val);
      else if (key == "warmup_days") c.warmup_days = parse_int(file, line, val);
      else if (key == "measure_days") c.measure_days = parse_int(file, line, val);
      else if (key == "seeds") c.seeds = parse_int(file, line, val);
      else if (key == "legacy_explore") c.legacy_explore = parse_double(file, line, val);
      else known = false;
    }
    if (!known) bad_line(file, line, "unknown key '" + key + "' in section [" + section + "]");
  }

  // page count is owned by [sim]; the model configs follow it
  cfg.isp.treatments = cfg.sim.pages;
  cfg.iit.actions = cfg.sim.pages;
  cfg.am.pages = cfg.sim.pages;

  if (cfg.sim.pages < 2) throw DataError("config: sim.pages must be at least 2");
  if (cfg.sim.users < 1) throw DataError("config: sim.users must be positive");
  if (cfg.experiment.train_fraction <= 0.0 || cfg.experiment.train_fraction >= 1.0)
    throw DataError("config: experiment.train_fraction must be in (0, 1)");
  if (cfg.experiment.history_days < 1 || cfg.experiment.rct_window_days < 1)
    throw DataError("config: history_days and rct_window_days must be positive");
  if (cfg.experiment.warmup_days < 0 || cfg.experiment.measure_days < 1)
    throw DataError("config: bad warmup/measure day counts");
  if (cfg.experiment.legacy_explore < 0.0 || cfg.experiment.legacy_explore > 1.0)
    throw DataError("config: experiment.legacy_explore must be in [0, 1]");
  return cfg;
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.sim.seed = seed;
  cfg.isp.seed = seed;
  cfg.iit.seed = seed;
  cfg.am.seed = seed;
}

std::uint64_t config_fingerprint(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + file);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

}  // namespace klan::pipeline

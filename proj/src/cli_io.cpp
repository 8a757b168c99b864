#include "vortexlayer/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string quote_text(std::string_view s) { return "'" + std::string(s) + "'"; }

[[noreturn]] void bad_value(std::string_view section, std::string_view key, std::string_view expected,
                            std::string_view value) {
  fail(ErrorKind::Parse, "[" + std::string(section) + "] " + std::string(key) + ": expected " +
                             std::string(expected) + ", got " + quote_text(value));
}

double to_double(std::string_view section, std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad_value(section, key, "a finite number", value);
  }
  return out;
}

template <class Int>
Int to_integer(std::string_view section, std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(section, key, "an integer", value);
  }
  return out;
}

bool to_bool(std::string_view section, std::string_view key, std::string_view value) {
  if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
  if (value == "false" || value == "no" || value == "0" || value == "off") return false;
  bad_value(section, key, "true or false", value);
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> parts;
  if (trim(text).empty()) return parts;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

// Keys of a FacePreset written as <prefix>.<field>.
bool set_preset_key(FacePreset& p, std::string_view section, std::string_view key, std::string_view field,
                    std::string_view value) {
  static const std::map<std::string_view, int, std::less<>> side_index = {
      {"bottom", 0}, {"right", 1}, {"top", 2}, {"left", 3}};
  if (field == "preset") {
    try {
      p.kind = parse_preset_kind(value);
    } catch (const Error&) {
      bad_value(section, key, "constant, sinusoidal or piecewise", value);
    }
  } else if (field == "value") {
    p.value = to_double(section, key, value);
  } else if (field == "mean") {
    p.mean = to_double(section, key, value);
  } else if (field == "amplitude") {
    p.amplitude = to_double(section, key, value);
  } else if (field == "periods") {
    p.periods = to_double(section, key, value);
  } else if (field == "phase") {
    p.phase = to_double(section, key, value);
  } else if (auto it = side_index.find(field); it != side_index.end()) {
    p.sides[static_cast<std::size_t>(it->second)] = to_double(section, key, value);
  } else {
    return false;
  }
  return true;
}

void set_key(RunConfig& c, std::string_view section, std::string_view key, std::string_view value) {
  auto unknown = [&] {
    fail(ErrorKind::Parse, "unknown key " + quote_text(key) + " in [" + std::string(section) + "]");
  };
  if (section == "run") {
    if (key == "scenario") {
      const auto names = scenario_names();
      if (std::find(names.begin(), names.end(), value) == names.end()) {
        bad_value(section, key, "custom, steady, nucleation or kellersegel", value);
      }
      c.scenario = std::string(value);
    } else if (key == "model") {
      try {
        c.model = parse_flux_model(value);
      } catch (const Error&) {
        bad_value(section, key, "meanfield or kellersegel", value);
      }
    } else if (key == "nu") {
      c.nu = to_double(section, key, value);
    } else if (key == "t_final") {
      c.t_final = to_double(section, key, value);
    } else if (key == "cfl") {
      c.cfl = to_double(section, key, value);
    } else if (key == "output_interval") {
      c.output_interval = to_double(section, key, value);
    } else if (key == "seed") {
      c.seed = to_integer<std::uint64_t>(section, key, value);
    } else if (key == "store_gradients") {
      c.store_gradients = to_bool(section, key, value);
    } else if (key == "kinetic") {
      c.kinetic = to_bool(section, key, value);
    } else if (key == "audit") {
      c.audit = to_bool(section, key, value);
    } else {
      unknown();
    }
  } else if (section == "grid") {
    if (key == "nx") {
      c.nx = to_integer<int>(section, key, value);
    } else if (key == "ny") {
      c.ny = to_integer<int>(section, key, value);
    } else if (key == "lx") {
      c.lx = to_double(section, key, value);
    } else if (key == "ly") {
      c.ly = to_double(section, key, value);
    } else {
      unknown();
    }
  } else if (section == "boundary") {
    const auto dot = key.find('.');
    if (dot != std::string_view::npos) {
      const std::string_view prefix = key.substr(0, dot);
      const std::string_view field = key.substr(dot + 1);
      FacePreset* target = prefix == "a" ? &c.boundary.a
                           : prefix == "b0" ? &c.boundary.b0
                           : prefix == "J" ? &c.boundary.threshold
                                           : nullptr;
      if (!target || !set_preset_key(*target, section, key, field, value)) unknown();
    } else if (key == "b1") {
      c.boundary.b1 = to_double(section, key, value);
    } else if (key == "kappa") {
      c.boundary.kappa = to_double(section, key, value);
    } else {
      unknown();
    }
  } else if (section == "initial") {
    InitialCondition& ic = c.initial;
    if (key == "preset") {
      if (value == "constant") {
        ic.kind = InitialCondition::Kind::Constant;
      } else if (value == "bump") {
        ic.kind = InitialCondition::Kind::Bump;
      } else if (value == "two-bump") {
        ic.kind = InitialCondition::Kind::TwoBump;
      } else if (value == "random") {
        ic.kind = InitialCondition::Kind::Random;
      } else {
        bad_value(section, key, "constant, bump, two-bump or random", value);
      }
    } else if (key == "value") {
      ic.value = to_double(section, key, value);
    } else if (key == "amplitude") {
      ic.amplitude = to_double(section, key, value);
    } else if (key == "width") {
      ic.width = to_double(section, key, value);
    } else if (key == "x0") {
      ic.x0 = to_double(section, key, value);
    } else if (key == "y0") {
      ic.y0 = to_double(section, key, value);
    } else if (key == "x1") {
      ic.x1 = to_double(section, key, value);
    } else if (key == "y1") {
      ic.y1 = to_double(section, key, value);
    } else if (key == "low") {
      ic.low = to_double(section, key, value);
    } else if (key == "high") {
      ic.high = to_double(section, key, value);
    } else if (key == "clip") {
      ic.clip = to_bool(section, key, value);
    } else {
      unknown();
    }
  } else if (section == "audit") {
    if (key == "c1") {
      c.audit_c1 = to_double(section, key, value);
    } else if (key == "c2") {
      c.audit_c2 = to_double(section, key, value);
    } else {
      unknown();
    }
  } else if (section == "sweep") {
    if (key == "nu_list") {
      c.nu_list.clear();
      for (std::string_view part : split_commas(value)) c.nu_list.push_back(to_double(section, key, part));
    } else if (key == "grid_rule") {
      try {
        parse_grid_rule(value);
      } catch (const Error&) {
        bad_value(section, key, "nu/<ratio> or fixed:<nx>", value);
      }
      c.grid_rule = std::string(value);
    } else if (key == "norms") {
      c.norms.clear();
      for (std::string_view part : split_commas(value)) c.norms.push_back(to_integer<int>(section, key, part));
    } else if (key == "layer_depths") {
      c.layer_depths = to_integer<int>(section, key, value);
    } else if (key == "xi_levels") {
      c.xi_levels = to_integer<int>(section, key, value);
    } else {
      unknown();
    }
  } else {
    fail(ErrorKind::Parse, "unknown section [" + std::string(section) + "]");
  }
}

double gaussian(double x, double y, double cx, double cy, double w) {
  const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
  return std::exp(-r2 / (w * w));
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) fail(ErrorKind::Io, "number formatting failed");
  return std::string(buf, ptr);
}

namespace {

// 17 significant digits, as used in snapshot payloads.
std::string format_full(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc()) fail(ErrorKind::Io, "number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

std::string_view initial_kind_name(InitialCondition::Kind kind) {
  switch (kind) {
    case InitialCondition::Kind::Constant: return "constant";
    case InitialCondition::Kind::Bump: return "bump";
    case InitialCondition::Kind::TwoBump: return "two-bump";
    case InitialCondition::Kind::Random: return "random";
  }
  return "constant";
}

std::vector<double> InitialCondition::sample(const Grid& grid, std::uint64_t seed) const {
  std::vector<double> out(grid.cell_count(), value);
  const double w = width * std::min(grid.lx(), grid.ly());
  switch (kind) {
    case Kind::Constant: break;
    case Kind::Bump:
    case Kind::TwoBump:
      for (std::size_t c = 0; c < out.size(); ++c) {
        const Vec2 p = grid.center(c);
        double bump = gaussian(p.x, p.y, x0 * grid.lx(), y0 * grid.ly(), w);
        if (kind == Kind::TwoBump) bump += gaussian(p.x, p.y, x1 * grid.lx(), y1 * grid.ly(), w);
        out[c] += amplitude * bump;
      }
      break;
    case Kind::Random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> draw(low, high);
      for (double& v : out) {
        v = draw(rng);
        if (clip) v = std::clamp(v, 0.0, 1.0);
      }
      break;
    }
  }
  return out;
}

double InitialCondition::lower_bound() const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Bump: return value + std::min(0.0, amplitude);
    case Kind::TwoBump: return value + 2.0 * std::min(0.0, amplitude);
    case Kind::Random: return clip ? std::clamp(low, 0.0, 1.0) : low;
  }
  return value;
}

double InitialCondition::upper_bound() const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Bump: return value + std::max(0.0, amplitude);
    case Kind::TwoBump: return value + 2.0 * std::max(0.0, amplitude);
    case Kind::Random: return clip ? std::clamp(high, 0.0, 1.0) : high;
  }
  return value;
}

std::vector<std::string> scenario_names() { return {"custom", "steady", "nucleation", "kellersegel"}; }

RunConfig scenario_config(std::string_view name) {
  RunConfig c;
  c.scenario = std::string(name);
  if (name == "custom") {
    c.initial.kind = InitialCondition::Kind::Bump;
    c.initial.amplitude = 1.0;
    c.initial.width = 0.1;
    return c;
  }
  if (name == "steady") {
    // omega = h = a = b0 is an exact steady state with v = 0.
    c.nx = c.ny = 32;
    c.nu = 0.01;
    c.t_final = 0.5;
    c.output_interval = 0.005;
    c.boundary.a = FacePreset::constant(0.5);
    c.boundary.b0 = FacePreset::constant(0.5);
    c.initial.kind = InitialCondition::Kind::Constant;
    c.initial.value = 0.5;
    return c;
  }
  if (name == "nucleation") {
    c.lx = c.ly = 0.25;
    c.nu = 0.025;
    c.nx = c.ny = 40;
    c.t_final = 0.1;
    c.boundary.a.kind = FacePreset::Kind::Sinusoidal;
    c.boundary.a.amplitude = 0.25;
    c.boundary.a.periods = 1.0;
    c.boundary.b0 = FacePreset::constant(0.5);
    c.boundary.b1 = 0.5;
    c.boundary.kappa = 0.5;
    c.boundary.threshold = FacePreset::constant(0.5);
    c.initial.kind = InitialCondition::Kind::Bump;
    c.initial.amplitude = 1.0;
    c.initial.width = 0.18;
    c.store_gradients = true;
    return c;
  }
  if (name == "kellersegel") {
    c.model = FluxModel::keller_segel();
    c.nu = 0.01;
    c.t_final = 1.0;
    c.boundary.a.kind = FacePreset::Kind::Sinusoidal;
    c.boundary.a.amplitude = 1.0;
    c.boundary.a.periods = 2.0;
    c.boundary.b0 = FacePreset::constant(0.3);
    c.initial.kind = InitialCondition::Kind::Random;
    c.initial.low = -0.2;
    c.initial.high = 1.2;
    c.initial.clip = true;
    c.seed = 7;
    return c;
  }
  fail(ErrorKind::Validation, "unknown scenario " + quote_text(name) + " (expected custom, steady, nucleation or kellersegel)");
}

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) fail(ErrorKind::Validation, message);
  };
  require(c.nx >= 2 && c.ny >= 2, "grid needs nx >= 2 and ny >= 2");
  require(c.lx > 0.0 && c.ly > 0.0 && std::isfinite(c.lx) && std::isfinite(c.ly), "domain lengths lx, ly must be positive");
  require(c.nu >= 0.0, "viscosity nu must be nonnegative");
  require(c.t_final >= 0.0, "t_final must be nonnegative");
  require(c.cfl > 0.0 && c.cfl <= 1.0, "cfl must lie in (0, 1]");
  require(c.output_interval >= 0.0, "output_interval must be nonnegative (0 selects t_final / 64)");
  validate_boundary_data(c.boundary);
  if (c.model == FluxModel::keller_segel()) {
    require(c.boundary.b1 == 0.0,
            "kellersegel requires b1 = 0: the inflow value must stay in [0,1] for the bound 0 <= omega <= 1");
    require(c.boundary.b0.lower_bound() >= 0.0 && c.boundary.b0.upper_bound() <= 1.0,
            "kellersegel requires 0 <= b0 <= 1 on the whole boundary for the bound 0 <= omega <= 1");
    require(c.initial.lower_bound() >= 0.0 && c.initial.upper_bound() <= 1.0,
            "kellersegel requires initial data with 0 <= omega_0 <= 1");
  }
  require(c.initial.width > 0.0, "initial width must be positive");
  require(c.initial.low <= c.initial.high, "initial random range needs low <= high");
  require(!c.audit_c1 || *c.audit_c1 >= 0.0, "audit c1 must be nonnegative");
  require(!c.audit_c2 || *c.audit_c2 >= 0.0, "audit c2 must be nonnegative");
  for (std::size_t k = 0; k < c.nu_list.size(); ++k) {
    require(c.nu_list[k] > 0.0, "sweep nu_list entries must be positive");
    require(k == 0 || c.nu_list[k] <= c.nu_list[k - 1], "sweep nu_list must be nonincreasing");
  }
  parse_grid_rule(c.grid_rule);
  require(!c.norms.empty(), "sweep norms must not be empty");
  for (int p : c.norms) require(p >= 1, "sweep norms must be integers >= 1");
  require(c.layer_depths >= 0, "sweep layer_depths must be nonnegative");
  require(c.xi_levels >= 8, "sweep xi_levels must be at least 8");
}

void apply_config_key(RunConfig& config, std::string_view section, std::string_view key, std::string_view value) {
  RunConfig next = config;
  if (section == "run" && key == "scenario") {
    set_key(next, section, key, trim(value));
    next = scenario_config(trim(value));
  } else {
    set_key(next, section, key, trim(value));
  }
  validate_config(next);
  config = std::move(next);
}

RunConfig parse_config(std::string_view text) {
  struct Entry {
    int line;
    std::string section;
    std::string key;
    std::string value;
  };
  std::vector<Entry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(ErrorKind::Parse, where + "malformed section header " + quote_text(line));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string, std::less<>> known = {"run", "grid", "boundary", "initial", "audit", "sweep"};
      if (!known.contains(section)) fail(ErrorKind::Parse, where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::Parse, where + "expected 'key = value', got " + quote_text(line));
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorKind::Parse, where + "missing key before '='");
    if (section.empty()) fail(ErrorKind::Parse, where + "key " + quote_text(key) + " appears before any [section]");
    entries.push_back({line_no, section, std::string(key), std::string(trim(line.substr(eq + 1)))});
  }

  RunConfig config;
  for (const Entry& e : entries) {
    if (e.section == "run" && e.key == "scenario") {
      try {
        set_key(config, e.section, e.key, e.value);
      } catch (const Error& err) {
        fail(ErrorKind::Parse, "line " + std::to_string(e.line) + ": " + err.what());
      }
      config = scenario_config(e.value);
    }
  }
  for (const Entry& e : entries) {
    if (e.section == "run" && e.key == "scenario") continue;
    try {
      set_key(config, e.section, e.key, e.value);
    } catch (const Error& err) {
      fail(ErrorKind::Parse, "line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string print_config(const RunConfig& c) {
  std::ostringstream out;
  auto kv = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [&](std::string_view key, double v) { kv(key, format_double(v)); };
  auto flag = [&](std::string_view key, bool v) { kv(key, v ? "true" : "false"); };
  auto preset = [&](const std::string& prefix, const FacePreset& p) {
    kv(prefix + ".preset", std::string(preset_kind_name(p.kind)));
    num(prefix + ".value", p.value);
    num(prefix + ".mean", p.mean);
    num(prefix + ".amplitude", p.amplitude);
    num(prefix + ".periods", p.periods);
    num(prefix + ".phase", p.phase);
    num(prefix + ".bottom", p.sides[0]);
    num(prefix + ".right", p.sides[1]);
    num(prefix + ".top", p.sides[2]);
    num(prefix + ".left", p.sides[3]);
  };
  auto join = [](const auto& values, auto&& fmt) {
    std::string s;
    for (std::size_t k = 0; k < values.size(); ++k) s += (k ? "," : "") + fmt(values[k]);
    return s;
  };

  out << "[run]\n";
  kv("scenario", c.scenario);
  kv("model", std::string(c.model.name()));
  num("nu", c.nu);
  num("t_final", c.t_final);
  num("cfl", c.cfl);
  num("output_interval", c.output_interval);
  kv("seed", std::to_string(c.seed));
  flag("store_gradients", c.store_gradients);
  flag("kinetic", c.kinetic);
  flag("audit", c.audit);
  out << "\n[grid]\n";
  kv("nx", std::to_string(c.nx));
  kv("ny", std::to_string(c.ny));
  num("lx", c.lx);
  num("ly", c.ly);
  out << "\n[boundary]\n";
  preset("a", c.boundary.a);
  preset("b0", c.boundary.b0);
  num("b1", c.boundary.b1);
  num("kappa", c.boundary.kappa);
  preset("J", c.boundary.threshold);
  out << "\n[initial]\n";
  kv("preset", std::string(initial_kind_name(c.initial.kind)));
  num("value", c.initial.value);
  num("amplitude", c.initial.amplitude);
  num("width", c.initial.width);
  num("x0", c.initial.x0);
  num("y0", c.initial.y0);
  num("x1", c.initial.x1);
  num("y1", c.initial.y1);
  num("low", c.initial.low);
  num("high", c.initial.high);
  flag("clip", c.initial.clip);
  if (c.audit_c1 || c.audit_c2) {
    out << "\n[audit]\n";
    if (c.audit_c1) num("c1", *c.audit_c1);
    if (c.audit_c2) num("c2", *c.audit_c2);
  }
  out << "\n[sweep]\n";
  if (!c.nu_list.empty()) kv("nu_list", join(c.nu_list, [](double v) { return format_double(v); }));
  kv("grid_rule", c.grid_rule);
  kv("norms", join(c.norms, [](int v) { return std::to_string(v); }));
  kv("layer_depths", std::to_string(c.layer_depths));
  kv("xi_levels", std::to_string(c.xi_levels));
  return out.str();
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (std::string_view part : split_commas(text)) out.push_back(to_double("cli", "list", part));
  if (out.empty()) fail(ErrorKind::Parse, "empty number list");
  return out;
}

// ---- snapshots ----

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

std::string snapshot_filename(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%.9f.csv", t);
  return buf;
}

void write_snapshot(const fs::path& path, const SnapshotHeader& h, const Snapshot& s) {
  const std::size_t n = static_cast<std::size_t>(h.nx) * static_cast<std::size_t>(h.ny);
  if (s.omega.size() != n || s.h.size() != n) fail(ErrorKind::InvalidArgument, "snapshot does not match its header");
  std::ofstream out = open_output(path);
  out << "# vortexlayer snapshot t=" << format_full(h.t) << " nx=" << h.nx << " ny=" << h.ny
      << " lx=" << format_full(h.lx) << " ly=" << format_full(h.ly) << " nu=" << format_full(h.nu)
      << " model=" << h.model.name() << '\n';
  const bool grad = s.grad_omega.has_value();
  out << (grad ? "i,j,omega,h,domega_dx,domega_dy\n" : "i,j,omega,h\n");
  std::string line;
  for (int j = 0; j < h.ny; ++j) {
    for (int i = 0; i < h.nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * h.nx + i;
      line.clear();
      line += std::to_string(i);
      line += ',';
      line += std::to_string(j);
      line += ',';
      line += format_full(s.omega[c]);
      line += ',';
      line += format_full(s.h[c]);
      if (grad) {
        line += ',';
        line += format_full(s.grad_omega->x[c]);
        line += ',';
        line += format_full(s.grad_omega->y[c]);
      }
      line += '\n';
      out << line;
    }
  }
  finish(out, path);
}

SnapshotFile read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read snapshot " + path.string());
  const std::string where = path.filename().string() + ": ";
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# vortexlayer snapshot")) {
    fail(ErrorKind::Parse, where + "missing snapshot header line");
  }
  std::map<std::string, std::string, std::less<>> fields;
  {
    std::istringstream tokens(line.substr(std::string_view("# vortexlayer snapshot").size()));
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) fail(ErrorKind::Parse, where + "malformed header field " + quote_text(tok));
      fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  auto field = [&](const char* name) -> std::string_view {
    const auto it = fields.find(name);
    if (it == fields.end()) fail(ErrorKind::Parse, where + "header lacks '" + name + "'");
    return it->second;
  };
  SnapshotFile file;
  SnapshotHeader& h = file.header;
  h.t = to_double("header", "t", field("t"));
  h.nx = to_integer<int>("header", "nx", field("nx"));
  h.ny = to_integer<int>("header", "ny", field("ny"));
  h.lx = to_double("header", "lx", field("lx"));
  h.ly = to_double("header", "ly", field("ly"));
  h.nu = to_double("header", "nu", field("nu"));
  h.model = parse_flux_model(field("model"));
  if (h.nx < 2 || h.ny < 2) fail(ErrorKind::Parse, where + "header has nx or ny below 2");

  if (!std::getline(in, line)) fail(ErrorKind::Parse, where + "snapshot payload is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool grad = false;
  if (line == "i,j,omega,h,domega_dx,domega_dy") {
    grad = true;
  } else if (line != "i,j,omega,h") {
    fail(ErrorKind::Parse, where + "unexpected column header " + quote_text(line));
  }
  const std::size_t n = static_cast<std::size_t>(h.nx) * static_cast<std::size_t>(h.ny);
  Snapshot& s = file.snapshot;
  s.t = h.t;
  s.omega.assign(n, 0.0);
  s.h.assign(n, 0.0);
  if (grad) s.grad_omega = VectorField{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<char> seen(n, 0);
  std::size_t rows = 0;
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto parts = split_commas(line);
    const std::string at = where + "line " + std::to_string(line_no) + ": ";
    if (parts.size() != (grad ? 6u : 4u)) fail(ErrorKind::Parse, at + "wrong number of columns");
    int i = 0;
    int j = 0;
    try {
      i = to_integer<int>("row", "i", parts[0]);
      j = to_integer<int>("row", "j", parts[1]);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, at + e.what());
    }
    if (i < 0 || i >= h.nx || j < 0 || j >= h.ny) fail(ErrorKind::Parse, at + "cell index outside the header grid");
    const std::size_t c = static_cast<std::size_t>(j) * h.nx + i;
    if (seen[c]) fail(ErrorKind::Parse, at + "duplicate cell");
    seen[c] = 1;
    try {
      s.omega[c] = to_double("row", "omega", parts[2]);
      s.h[c] = to_double("row", "h", parts[3]);
      if (grad) {
        s.grad_omega->x[c] = to_double("row", "domega_dx", parts[4]);
        s.grad_omega->y[c] = to_double("row", "domega_dy", parts[5]);
      }
    } catch (const Error& e) {
      fail(ErrorKind::Parse, at + e.what());
    }
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::Parse, where + "snapshot payload is empty");
  if (rows != n) {
    fail(ErrorKind::Parse, where + "payload has " + std::to_string(rows) + " rows but the header says nx*ny = " +
                               std::to_string(n));
  }
  return file;
}

std::vector<SnapshotFile> read_snapshot_directory(const fs::path& dir) {
  std::vector<SnapshotFile> files;
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.starts_with("snap_") && name.ends_with(".csv")) {
        files.push_back(read_snapshot(entry.path()));
      }
    }
  }
  if (files.empty()) fail(ErrorKind::NoSnapshots, "no snapshots in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const SnapshotFile& a, const SnapshotFile& b) { return a.header.t < b.header.t; });
  return files;
}

// ---- CSV reports ----

void write_monitors(const fs::path& path, std::span<const StepReport> steps) {
  std::ofstream out = open_output(path);
  out << "step,t,dt,mass_before,mass_after,mass_residual,boundary_flux,min_omega,max_omega,robin,dissipation,"
         "dt_grad_h,h_second_difference,elliptic_iterations\n";
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const StepReport& s = steps[k];
    out << k + 1 << ',' << format_double(s.t) << ',' << format_double(s.dt) << ',' << format_double(s.mass_before)
        << ',' << format_double(s.mass_after) << ',' << format_double(s.mass_residual()) << ','
        << format_double(s.boundary_flux_sum()) << ',' << format_double(s.min_omega) << ','
        << format_double(s.max_omega) << ',' << format_double(s.robin) << ',' << format_double(s.dissipation) << ','
        << format_double(s.dt_grad_h) << ',' << format_double(s.h_second_difference) << ','
        << s.elliptic_iterations << '\n';
  }
  finish(out, path);
}

void write_entropy_report(const fs::path& path, const ResidualReport& report) {
  std::ofstream out = open_output(path);
  out << "xi,phi_id,residual,pass\n";
  for (const ResidualEntry& e : report.entries) {
    out << format_double(e.xi) << ',' << e.phi_id << ',' << format_double(e.residual) << ',' << (e.pass ? 1 : 0)
        << '\n';
  }
  finish(out, path);
}

void write_sweep_report(const fs::path& path, const SweepReport& report) {
  std::ofstream out = open_output(path);
  out << "nu,nx,ny,status,steps,sup_abs_omega,energy,min_omega,max_omega,initial_mass,final_mass,"
         "max_mass_residual,entropy_min,entropy_tolerance,entropy_pass,error\n";
  for (const SweepRun& r : report.runs) {
    const RunSummary& s = r.summary;
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << format_double(r.nu) << ',' << r.nx << ',' << r.ny << ',' << (r.ok ? "ok" : "failed") << ',' << s.steps
        << ',' << format_double(s.sup_abs_omega) << ',' << format_double(s.energy_bound()) << ','
        << format_double(s.min_omega) << ',' << format_double(s.max_omega) << ',' << format_double(s.initial_mass)
        << ',' << format_double(s.final_mass) << ',' << format_double(s.max_relative_mass_residual) << ',';
    if (r.entropy) {
      out << format_double(r.entropy->minimum) << ',' << format_double(r.entropy->tolerance) << ','
          << (r.entropy->pass() ? 1 : 0);
    } else {
      out << ",,";
    }
    out << ',' << error << '\n';
  }
  finish(out, path);
}

void write_distances(const fs::path& path, const SweepReport& report) {
  std::ofstream out = open_output(path);
  out << "nu_i,nu_j,p,distance\n";
  for (std::size_t pi = 0; pi < report.norms.size(); ++pi) {
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      for (std::size_t j = i + 1; j < report.runs.size(); ++j) {
        out << format_double(report.runs[i].nu) << ',' << format_double(report.runs[j].nu) << ','
            << report.norms[pi] << ',' << format_double(report.get(pi, i, j)) << '\n';
      }
    }
  }
  finish(out, path);
}

void write_layers(const fs::path& path, const SweepReport& report) {
  std::ofstream out = open_output(path);
  out << "nu,group,depth,depth_over_nu,omega\n";
  for (const SweepRun& r : report.runs) {
    for (const LayerRow& row : r.layers) {
      out << format_double(r.nu) << ',' << row.group << ',' << format_double(row.depth) << ','
          << format_double(row.depth_over_nu) << ',' << format_double(row.omega) << '\n';
    }
  }
  finish(out, path);
}

bool KineticReport::interior_decreasing() const {
  for (std::size_t k = 1; k < interior.size(); ++k) {
    if (interior[k] > interior[k - 1]) return false;
  }
  return true;
}

void write_kinetic_report(const fs::path& path, const KineticReport& r) {
  std::ofstream out = open_output(path);
  out << "quantity,epsilon,xi,value\n";
  out << "reconstruction_error,,," << format_double(r.snapshots.max_reconstruction_error) << '\n';
  out << "reconstruction_bound,,," << format_double(r.delta_xi) << '\n';
  out << "rho_violation,,," << format_double(r.snapshots.max_rho_violation) << '\n';
  out << "monotone,,," << (r.snapshots.monotone ? 1 : 0) << '\n';
  out << "support,,," << (r.snapshots.support ? 1 : 0) << '\n';
  for (std::size_t k = 0; k < r.windows.size(); ++k) {
    out << "interior_functional," << format_double(r.windows[k]) << ",," << format_double(r.interior[k]) << '\n';
  }
  for (std::size_t k = 0; k < r.depths.size(); ++k) {
    out << "boundary_functional," << format_double(r.depths[k]) << ",," << format_double(r.boundary[k]) << '\n';
  }
  const double eps = r.windows.empty() ? 0.0 : r.windows.back();
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    out << "defect_integral," << format_double(eps) << ',' << format_double(r.levels[k]) << ','
        << format_double(r.defect_integral[k]) << '\n';
  }
  finish(out, path);
}

// ---- orchestration ----

namespace {

RunOptions run_options(const RunConfig& c) {
  RunOptions o;
  o.t_final = c.t_final;
  o.output_interval = c.effective_output_interval();
  o.cfl = c.cfl;
  o.store_gradients = c.store_gradients || c.audit;
  return o;
}

void remove_old_snapshots(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("snap_") && name.ends_with(".csv")) fs::remove(entry.path());
  }
}

void make_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
  finish(out, path);
}

struct LoadedRun {
  RunConfig config;
  Grid grid;
  std::vector<Snapshot> snapshots;
};

LoadedRun load_run(const fs::path& dir) {
  std::vector<SnapshotFile> files = read_snapshot_directory(dir);
  RunConfig config = load_config(dir / "config.cfg");
  const SnapshotHeader& h = files.front().header;
  for (const SnapshotFile& f : files) {
    if (f.header.nx != h.nx || f.header.ny != h.ny) fail(ErrorKind::Parse, "snapshots in " + dir.string() + " disagree on the grid");
  }
  if (h.nx != config.nx || h.ny != config.ny || h.model != config.model) {
    fail(ErrorKind::Parse, "snapshots in " + dir.string() + " do not match config.cfg");
  }
  LoadedRun run{config, Grid(h.nx, h.ny, h.lx, h.ly), {}};
  run.snapshots.reserve(files.size());
  for (SnapshotFile& f : files) run.snapshots.push_back(std::move(f.snapshot));
  return run;
}

std::vector<double> kinetic_levels(const KineticGrid& kg) {
  std::vector<double> levels(static_cast<std::size_t>(kg.n_xi));
  for (int k = 0; k < kg.n_xi; ++k) levels[k] = kg.level(k);
  return levels;
}

}  // namespace

RunOutcome run_to_directory(const RunConfig& config, const fs::path& dir) {
  validate_config(config);
  make_directory(dir);
  remove_old_snapshots(dir);
  write_text(dir / "config.cfg", print_config(config));

  const Grid grid(config.nx, config.ny, config.lx, config.ly);
  std::vector<double> omega0 = config.initial.sample(grid, config.seed);
  const std::vector<double> start = omega0;
  const SnapshotHeader base{0.0, config.nx, config.ny, config.lx, config.ly, config.nu, config.model};

  RunOutcome outcome;
  std::vector<double> last;
  const SnapshotSink sink = [&](const Snapshot& snap, const State&) {
    SnapshotHeader h = base;
    h.t = snap.t;
    write_snapshot(dir / snapshot_filename(snap.t), h, snap);
    last = snap.omega;
    ++outcome.snapshots;
  };
  RunOptions options = run_options(config);
  options.keep_snapshots = false;
  const Trajectory traj = run(grid, config.model, config.nu, config.boundary, std::move(omega0), options, sink);
  write_monitors(dir / "monitors.csv", traj.steps);

  outcome.summary = traj.summary;
  for (std::size_t c = 0; c < start.size(); ++c) outcome.max_drift = std::max(outcome.max_drift, std::abs(last[c] - start[c]));
  if (config.audit) audit_directory(dir);
  if (config.kinetic) kinetic_directory(dir);
  return outcome;
}

AuditOutcome audit_directory(const fs::path& dir, std::size_t threads) {
  const LoadedRun loaded = load_run(dir);
  const RunConfig& config = loaded.config;
  const AuditInput input =
      AuditInput::from_snapshots(loaded.grid, config.model, config.nu, config.boundary, loaded.snapshots);
  const std::vector<TestFunction> family = make_test_function_family(input.t_final(), config.lx, config.ly);
  const KineticGrid kg = make_kinetic_grid(input.max_abs_omega(), config.xi_levels);
  const std::vector<double> levels = kinetic_levels(kg);

  AuditOutcome outcome;
  outcome.entropy = audit_entropy(input, family, levels, ToleranceModel{}, threads);
  ToleranceModel tolerance;
  if (config.audit_c1 || config.audit_c2) {
    tolerance = {config.audit_c1.value_or(0.0), config.audit_c2.value_or(0.0)};
  } else {
    tolerance = fit_tolerance(outcome.entropy.minimum, outcome.entropy.dx, outcome.entropy.dt);
  }
  apply_tolerance(outcome.entropy, tolerance);
  write_entropy_report(dir / "entropy_report.csv", outcome.entropy);

  outcome.bounds = bound_monitors(input);
  const double width = input.t_final() / 8.0;
  if (width > 0.0) {
    outcome.measure_constant = calibrate_measure_constant(input, levels, width);
    for (double xi : levels) {
      if (!measure_bound_check(input, xi, outcome.measure_constant, outcome.entropy.tolerance, width).pass) {
        ++outcome.measure_failures;
      }
    }
  }
  std::ofstream out = open_output(dir / "bounds.csv");
  out << "t,energy_residual\n";
  for (std::size_t k = 0; k < outcome.bounds.energy_times.size(); ++k) {
    out << format_double(outcome.bounds.energy_times[k]) << ',' << format_double(outcome.bounds.energy_residuals[k])
        << '\n';
  }
  finish(out, dir / "bounds.csv");
  return outcome;
}

KineticReport kinetic_directory(const fs::path& dir) {
  const LoadedRun loaded = load_run(dir);
  const RunConfig& config = loaded.config;
  const Grid& grid = loaded.grid;
  const std::vector<Snapshot>& snaps = loaded.snapshots;

  double radius = 0.0;
  for (const Snapshot& s : snaps) {
    for (double w : s.omega) radius = std::max(radius, std::abs(w));
  }
  const KineticGrid kg = make_kinetic_grid(radius, config.xi_levels);
  KineticReport report;
  report.delta_xi = kg.spacing();
  report.snapshots = audit_kinetic_snapshots(snaps, kg);
  report.levels = kinetic_levels(kg);

  const double T = snaps.back().t - snaps.front().t;
  KineticSlice smallest{kg, 0, {}};
  for (double eps = T / 4.0; eps > 0.0 && report.windows.size() < 3; eps *= 0.5) {
    KineticSlice f0 = trace_time_average(snaps, kg, eps);
    double sum = 0.0;
    for (double f : f0.f) sum += f * (1.0 - f);
    report.windows.push_back(eps);
    report.interior.push_back(sum * kg.spacing() * grid.cell_area());
    smallest = std::move(f0);
  }
  report.defect_integral.assign(report.levels.size(), 0.0);
  for (int k = 0; k < kg.n_xi && smallest.cells > 0; ++k) {
    double sum = 0.0;
    for (std::size_t c = 0; c < smallest.cells; ++c) {
      const double f = smallest.at(k, c);
      sum += f * (1.0 - f);
    }
    report.defect_integral[k] = sum * grid.cell_area();
  }

  const AuditInput input = AuditInput::from_snapshots(grid, config.model, config.nu, config.boundary, snaps);
  std::vector<std::vector<double>> vn;
  std::vector<double> times;
  for (const AuditFrame& f : input.frames) {
    vn.push_back(f.boundary_vn);
    times.push_back(f.t);
  }
  const double spacing = std::min(grid.dx(), grid.dy());
  const int half = std::min(grid.nx(), grid.ny()) / 2;
  for (int cells = 2; cells <= half && report.depths.size() < 3; cells *= 2) {
    const BoundaryKineticTrace fg = trace_boundary_average(grid, snaps, kg, cells * spacing);
    report.depths.push_back(cells * spacing);
    report.boundary.push_back(trace_defect_functionals(grid, config.model, smallest, fg, vn, times).boundary);
  }
  write_kinetic_report(dir / "kinetic_report.csv", report);
  return report;
}

SweepConfig make_sweep_config(const RunConfig& config) {
  validate_config(config);
  SweepConfig sweep;
  sweep.scenario = config.scenario;
  sweep.base.model = config.model;
  sweep.base.lx = config.lx;
  sweep.base.ly = config.ly;
  sweep.base.boundary = config.boundary;
  sweep.base.initial = [ic = config.initial, seed = config.seed](const Grid& g) { return ic.sample(g, seed); };
  sweep.base.options = run_options(config);
  sweep.base.options.store_gradients = config.store_gradients;
  if (!config.nu_list.empty()) sweep.viscosities = config.nu_list;
  sweep.grid_rule = parse_grid_rule(config.grid_rule);
  if (sweep.grid_rule.kind == GridRule::Kind::Fixed && config.grid_rule == "fixed") sweep.grid_rule.fixed_nx = config.nx;
  sweep.norms = config.norms;
  sweep.entropy_audit = config.audit;
  sweep.kinetic_audit = config.kinetic;
  sweep.layer_depths = config.layer_depths;
  sweep.xi_levels = config.xi_levels;
  return sweep;
}

SweepReport sweep_to_directory(const RunConfig& config, const fs::path& dir) {
  const SweepConfig sweep = make_sweep_config(config);
  validate_sweep(sweep);
  make_directory(dir);
  write_text(dir / "config.cfg", print_config(config));
  SweepReport report = run_sweep(sweep);
  write_sweep_report(dir / "sweep_report.csv", report);
  write_distances(dir / "distances.csv", report);
  write_layers(dir / "layers.csv", report);
  return report;
}

}  // namespace vortexlayer

#include "consensus_opt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace consensus_opt {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what) {
  const double v = parse_number<double>(text, what);
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
  return v;
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, ',')) out.push_back(parse_double(part, what));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string init_string(const ExperimentConfig& cfg) {
  return std::string(cfg.init_kind == InitSpec::Kind::uniform_box ? "box:" : "gauss:") +
         format_double(cfg.init_a) + "," + format_double(cfg.init_b);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::vector<double> parse_grid(std::string_view text) {
  text = trim(text);
  if (text.find(':') == std::string_view::npos) {
    auto values = parse_list(text, "grid");
    if (values.empty()) throw ConfigError("grid must be non-empty");
    return values;
  }
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("grid must look like a:b:Nlog or a:b:Nlin");
  const double a = parse_double(parts[0], "grid start");
  const double b = parse_double(parts[1], "grid end");
  std::string_view count_text = parts[2];
  std::string_view kind;
  for (std::string_view suffix : {"linc", "log", "lin"}) {
    if (count_text.size() > suffix.size() && count_text.ends_with(suffix)) {
      kind = suffix;
      count_text.remove_suffix(suffix.size());
      break;
    }
  }
  if (kind.empty()) throw ConfigError("grid spacing must be 'log', 'lin' or 'linc'");
  const int n = parse_number<int>(count_text, "grid size");
  if (n < 1) throw ConfigError("grid size must be >= 1");

  std::vector<double> grid(static_cast<std::size_t>(n));
  if (kind == "log") {
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("log grid endpoints must be > 0");
    const double la = std::log10(a), lb = std::log10(b);
    for (int i = 0; i < n; ++i) {
      grid[i] = n == 1 ? a : std::pow(10.0, la + (lb - la) * i / (n - 1));
    }
    grid.front() = a;
    grid.back() = b;
  } else if (kind == "lin") {
    const double step = (b - a) / n;
    for (int i = 0; i < n; ++i) grid[i] = a + step * (i + 1);
    grid.back() = b;
  } else {
    for (int i = 0; i < n; ++i) grid[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    grid.back() = b;
  }
  return grid;
}

SolverParams ExperimentConfig::solver_params() const {
  SolverParams p;
  p.alpha = alpha;
  p.lambda = lambda;
  p.sigma = sigma;
  p.delta = delta;
  p.dt = dt;
  p.speed = speed;
  p.n_particles = n_particles;
  p.scheme = scheme;
  p.hopping_variance = hopping_variance;
  p.threads = threads;
  return p;
}

InitSpec ExperimentConfig::init_spec() const {
  return init_kind == InitSpec::Kind::uniform_box ? InitSpec::box(init_a, init_b, dim)
                                                  : InitSpec::gaussian(init_a, init_b, dim);
}

TerminationRule ExperimentConfig::termination(const Vector& target) const {
  TerminationRule rule;
  rule.epsilon = epsilon;
  rule.consecutive = consecutive;
  rule.max_iterations = max_iterations;
  rule.target = target;
  return rule;
}

Vector ExperimentConfig::mu0_vector() const {
  if (mu0.empty()) return Vector::Constant(dim, 5.0);
  if (mu0.size() == 1) return Vector::Constant(dim, mu0.front());
  return Eigen::Map<const Vector>(mu0.data(), static_cast<Eigen::Index>(mu0.size()));
}

void ExperimentConfig::validate() const {
  require(dim >= 1, "dim must be >= 1");
  require(n_particles >= 2, "n_particles must be >= 2");
  require(alpha >= 0.0, "alpha must be >= 0");
  require(lambda > 0.0, "lambda must be > 0");
  require(delta >= 0.0, "delta must be >= 0");
  require(sigma >= 0.0, "sigma must be >= 0");
  require(dt > 0.0, "dt must be > 0");
  require(speed > 0.0, "speed must be > 0");
  require(!hopping_variance || *hopping_variance > 0.0, "hopping_variance must be > 0");
  require(!dt_grid.empty(), "dt_grid must be non-empty");
  require(!delta_grid.empty(), "delta_grid must be non-empty");
  require(!s_grid.empty(), "s_grid must be non-empty");
  for (double v : dt_grid) require(v > 0.0, "dt_grid values must be > 0");
  for (double v : delta_grid) require(v >= 0.0, "delta_grid values must be >= 0");
  for (double v : s_grid) require(v > 0.0, "s_grid values must be > 0");
  require(!seeds.empty(), "seeds must be non-empty");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(consecutive >= 1, "consecutive must be >= 1");
  require(max_iterations >= 0, "max_iterations must be >= 0");
  require(iterations >= 0, "iterations must be >= 0");
  if (init_kind == InitSpec::Kind::uniform_box) {
    require(init_a < init_b, "init box lower bound must be below upper bound");
  } else {
    require(init_b > 0.0, "init gaussian variance must be > 0");
  }
  require(variance > 0.0, "variance must be > 0");
  require(mu0.size() <= 1 || static_cast<int>(mu0.size()) == dim, "mu0 must have dim entries");
  require(tol > 0.0, "tol must be > 0");
  require(mc_n >= 100, "mc_n must be >= 100");
  require(fp_max_iter >= 1, "fp_max_iter must be >= 1");
  require(threads >= 1, "threads must be >= 1");
}

ExperimentConfig default_config(std::string_view command) {
  if (command != "run" && command != "sweep-dt" && command != "tune-delta" &&
      command != "sweep-s" && command != "fixed-point") {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
  ExperimentConfig cfg;
  cfg.dt_grid = parse_grid("1e-2:1e2:20log");
  cfg.delta_grid = parse_grid("0:2:20lin");
  cfg.s_grid = parse_grid("1e-1:1e3:17log");
  for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);

  if (command == "sweep-s") {
    cfg.scheme = Scheme::consensus_freezing;
    cfg.dim = 2;
    cfg.n_particles = 100;
    cfg.delta = 1.0;
    cfg.init_kind = InitSpec::Kind::gaussian;
    cfg.init_a = 5.0;
    cfg.init_b = 0.5;
  } else if (command == "fixed-point") {
    cfg.objective = "quadratic";
    cfg.dim = 2;
    cfg.alpha = 1.0;
  }
  return cfg;
}

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  using Setter = std::function<void(ExperimentConfig&, std::string_view)>;
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"scheme", [](auto& c, auto v) {
         try {
           c.scheme = parse_scheme(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"objective", [](auto& c, auto v) { c.objective = std::string(v); }},
      {"dim", [](auto& c, auto v) { c.dim = parse_number<int>(v, "dim"); }},
      {"n_particles", [](auto& c, auto v) { c.n_particles = parse_number<int>(v, "n_particles"); }},
      {"alpha", [](auto& c, auto v) { c.alpha = parse_double(v, "alpha"); }},
      {"lambda", [](auto& c, auto v) { c.lambda = parse_double(v, "lambda"); }},
      {"delta", [](auto& c, auto v) { c.delta = parse_double(v, "delta"); }},
      {"sigma", [](auto& c, auto v) { c.sigma = parse_double(v, "sigma"); }},
      {"dt", [](auto& c, auto v) { c.dt = parse_double(v, "dt"); }},
      {"speed", [](auto& c, auto v) { c.speed = parse_double(v, "speed"); }},
      {"hopping_variance", [](auto& c, auto v) {
         if (v.empty() || v == "auto") {
           c.hopping_variance.reset();
         } else {
           c.hopping_variance = parse_double(v, "hopping_variance");
         }
       }},
      {"dt_grid", [](auto& c, auto v) { c.dt_grid = parse_grid(v); }},
      {"delta_grid", [](auto& c, auto v) { c.delta_grid = parse_grid(v); }},
      {"s_grid", [](auto& c, auto v) { c.s_grid = parse_grid(v); }},
      {"seeds", [](auto& c, auto v) {
         c.seeds.clear();
         for (auto part : split(v, ',')) c.seeds.push_back(parse_number<std::uint64_t>(part, "seeds"));
       }},
      {"epsilon", [](auto& c, auto v) { c.epsilon = parse_double(v, "epsilon"); }},
      {"consecutive", [](auto& c, auto v) { c.consecutive = parse_number<int>(v, "consecutive"); }},
      {"max_iterations", [](auto& c, auto v) { c.max_iterations = parse_number<int>(v, "max_iterations"); }},
      {"iterations", [](auto& c, auto v) { c.iterations = parse_number<int>(v, "iterations"); }},
      {"init", [](auto& c, auto v) {
         const auto colon = v.find(':');
         if (colon == std::string_view::npos) throw ConfigError("init must be box:lo,hi or gauss:mean,var");
         const auto kind = trim(v.substr(0, colon));
         const auto nums = parse_list(v.substr(colon + 1), "init");
         if (nums.size() != 2) throw ConfigError("init needs exactly two numbers");
         if (kind == "box") {
           c.init_kind = InitSpec::Kind::uniform_box;
         } else if (kind == "gauss") {
           c.init_kind = InitSpec::Kind::gaussian;
         } else {
           throw ConfigError("init kind must be 'box' or 'gauss'");
         }
         c.init_a = nums[0];
         c.init_b = nums[1];
       }},
      {"variance", [](auto& c, auto v) { c.variance = parse_double(v, "variance"); }},
      {"mu0", [](auto& c, auto v) { c.mu0 = parse_list(v, "mu0"); }},
      {"tol", [](auto& c, auto v) { c.tol = parse_double(v, "tol"); }},
      {"mc_n", [](auto& c, auto v) { c.mc_n = parse_number<int>(v, "mc_n"); }},
      {"fp_max_iter", [](auto& c, auto v) { c.fp_max_iter = parse_number<int>(v, "fp_max_iter"); }},
      {"output", [](auto& c, auto v) { c.output = std::string(v); }},
      {"threads", [](auto& c, auto v) { c.threads = parse_number<int>(v, "threads"); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second(cfg, value);
}

void load_config_text(ExperimentConfig& cfg, std::string_view text) {
  int line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      try {
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'");
        apply_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("line " + std::to_string(line_number) + ": " + e.what());
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  load_config_text(base, buffer.str());
  base.validate();
  return base;
}

std::string emit_config(const ExperimentConfig& cfg, bool include_runtime) {
  std::ostringstream out;
  out << "scheme = " << scheme_name(cfg.scheme) << '\n'
      << "objective = " << cfg.objective << '\n'
      << "dim = " << cfg.dim << '\n'
      << "n_particles = " << cfg.n_particles << '\n'
      << "alpha = " << format_double(cfg.alpha) << '\n'
      << "lambda = " << format_double(cfg.lambda) << '\n'
      << "delta = " << format_double(cfg.delta) << '\n'
      << "sigma = " << format_double(cfg.sigma) << '\n'
      << "dt = " << format_double(cfg.dt) << '\n'
      << "speed = " << format_double(cfg.speed) << '\n'
      << "hopping_variance = "
      << (cfg.hopping_variance ? format_double(*cfg.hopping_variance) : std::string("auto")) << '\n'
      << "dt_grid = " << join(cfg.dt_grid) << '\n'
      << "delta_grid = " << join(cfg.delta_grid) << '\n'
      << "s_grid = " << join(cfg.s_grid) << '\n'
      << "seeds = " << join(cfg.seeds) << '\n'
      << "epsilon = " << format_double(cfg.epsilon) << '\n'
      << "consecutive = " << cfg.consecutive << '\n'
      << "max_iterations = " << cfg.max_iterations << '\n'
      << "iterations = " << cfg.iterations << '\n'
      << "init = " << init_string(cfg) << '\n'
      << "variance = " << format_double(cfg.variance) << '\n'
      << "mu0 = " << join(cfg.mu0) << '\n'
      << "tol = " << format_double(cfg.tol) << '\n'
      << "mc_n = " << cfg.mc_n << '\n'
      << "fp_max_iter = " << cfg.fp_max_iter << '\n';
  if (include_runtime) {
    out << "output = " << cfg.output << '\n' << "threads = " << cfg.threads << '\n';
  }
  return out.str();
}

}  // namespace consensus_opt

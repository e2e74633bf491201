#include "rsmfg/scenarios.hpp"

#include <boost/program_options.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rsmfg/csv.hpp"
#include "rsmfg/random.hpp"

namespace po = boost::program_options;

namespace rsmfg {

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"affine-lq", "mckean-vlasov", "kuramoto", "ou-benchmark"};
  return names;
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.output_dir = "out/" + name;
  if (name == "affine-lq") {
    c.x_min = -19.0;
    c.x_max = 21.0;
    c.nx = 201;
    c.T = 5.0;
    c.nt = 3001;
    c.q = 1.2;
    c.Q = 0.1;
    c.delta = 1e5;
    c.sigma = 2.0;
    c.epsilon = 5.0;
    c.beta = 0.0;
  } else if (name == "mckean-vlasov") {
    c.x_min = -7.0;
    c.x_max = 9.0;
    c.nx = 161;
    c.T = 1.0;
    c.nt = 401;
    c.q = 1.0;
    c.Q = 0.0;
    c.delta = 8.0;  // rho = 2 with eps = 1
    c.sigma = 1.0;
    c.epsilon = 1.0;
    c.beta = 1.0;
  } else if (name == "ou-benchmark") {
    c.x_min = -6.0;
    c.x_max = 6.0;
    c.nx = 601;
    c.T = 1.0;
    c.nt = 3001;
    c.q = 1.0;
    c.Q = 0.0;
    c.delta = 1e5;
    c.sigma = 1.0;
    c.epsilon = 1.0;
  } else if (name == "kuramoto") {
    c.x_min = -std::numbers::pi;
    c.x_max = std::numbers::pi;
    c.nx = 129;
    c.T = 10.0;
    c.nt = 2501;
    c.q = 0.0;
    c.Q = 0.5;
    c.delta = 1e5;
    c.sigma = 0.5;
    c.epsilon = 1.0;
    c.beta = 1.0;
    c.n = 500;
  } else {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  return c;
}

ScenarioConfig parse_config(std::istream& is) {
  po::options_description desc;
  desc.add_options()
      ("scenario.name", po::value<std::string>())
      ("grid.x_min", po::value<double>())
      ("grid.x_max", po::value<double>())
      ("grid.nx", po::value<std::size_t>())
      ("time.T", po::value<double>())
      ("time.nt", po::value<std::size_t>())
      ("model.q", po::value<double>())
      ("model.Q", po::value<double>())
      ("model.delta", po::value<double>())
      ("model.sigma", po::value<double>())
      ("model.epsilon", po::value<double>())
      ("model.beta", po::value<double>())
      ("fixedpoint.theta", po::value<double>())
      ("fixedpoint.tol", po::value<double>())
      ("fixedpoint.max_iter", po::value<std::size_t>())
      ("particles.n", po::value<std::size_t>())
      ("particles.paths", po::value<std::size_t>())
      ("particles.replicas", po::value<std::size_t>())
      ("particles.seed", po::value<std::uint64_t>())
      ("output.dir", po::value<std::string>());

  po::variables_map vm;
  try {
    po::store(po::parse_config_file(is, desc, false), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!vm.count("scenario.name")) throw ConfigError("config: missing required field scenario.name");

  ScenarioConfig c;
  try {
    c = preset(vm["scenario.name"].as<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  auto take = [&vm](const char* key, auto& field) {
    if (vm.count(key)) field = vm[key].as<std::decay_t<decltype(field)>>();
  };
  take("grid.x_min", c.x_min);
  take("grid.x_max", c.x_max);
  take("grid.nx", c.nx);
  take("time.T", c.T);
  take("time.nt", c.nt);
  take("model.q", c.q);
  take("model.Q", c.Q);
  take("model.delta", c.delta);
  take("model.sigma", c.sigma);
  take("model.epsilon", c.epsilon);
  take("model.beta", c.beta);
  take("fixedpoint.theta", c.theta);
  take("fixedpoint.tol", c.tol);
  take("fixedpoint.max_iter", c.max_iter);
  take("particles.n", c.n);
  take("particles.paths", c.paths);
  take("particles.replicas", c.replicas);
  take("particles.seed", c.seed);
  take("output.dir", c.output_dir);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  return parse_config(is);
}

std::string canonical_text(const ScenarioConfig& c) {
  using csv::format_number;
  auto num = [](std::size_t v) { return std::to_string(v); };
  std::ostringstream os;
  os << "fixedpoint.max_iter=" << num(c.max_iter) << '\n'
     << "fixedpoint.theta=" << format_number(c.theta) << '\n'
     << "fixedpoint.tol=" << format_number(c.tol) << '\n'
     << "grid.nx=" << num(c.nx) << '\n'
     << "grid.x_max=" << format_number(c.x_max) << '\n'
     << "grid.x_min=" << format_number(c.x_min) << '\n'
     << "model.Q=" << format_number(c.Q) << '\n'
     << "model.beta=" << format_number(c.beta) << '\n'
     << "model.delta=" << format_number(c.delta) << '\n'
     << "model.epsilon=" << format_number(c.epsilon) << '\n'
     << "model.q=" << format_number(c.q) << '\n'
     << "model.sigma=" << format_number(c.sigma) << '\n'
     << "output.dir=" << c.output_dir << '\n'
     << "particles.n=" << num(c.n) << '\n'
     << "particles.paths=" << num(c.paths) << '\n'
     << "particles.replicas=" << num(c.replicas) << '\n'
     << "particles.seed=" << c.seed << '\n'
     << "scenario.name=" << c.name << '\n'
     << "time.T=" << format_number(c.T) << '\n'
     << "time.nt=" << num(c.nt) << '\n';
  return os.str();
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

Grid1D make_grid(const ScenarioConfig& cfg) { return Grid1D(cfg.x_min, cfg.x_max, cfg.nx); }

TimeGrid make_times(const ScenarioConfig& cfg) { return TimeGrid(cfg.T, cfg.nt); }

namespace {

ScalarFn gaussian(double mean, double variance) {
  return [mean, variance](double x) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
  };
}

}  // namespace

double initial_mean(const ScenarioConfig& cfg) {
  if (cfg.name == "affine-lq" || cfg.name == "mckean-vlasov") return 1.0;
  return 0.0;
}

ModelSpec make_model(const ScenarioConfig& cfg) {
  ModelSpec m;
  m.delta = cfg.delta;
  m.epsilon = cfg.epsilon;
  const double q = cfg.q;
  const double Q = cfg.Q;
  const double beta = cfg.beta;
  const double sigma = cfg.sigma;
  m.diffusion = [sigma](double, double) { return sigma; };

  if (cfg.name == "affine-lq" || cfg.name == "mckean-vlasov") {
    const bool priced_by_mean = cfg.name == "affine-lq";
    m.drift = [beta](double, double, double u, const CouplingFeatures& cf) { return beta * cf.mean + u; };
    m.running_cost = [q, priced_by_mean](double, double x, double u, const CouplingFeatures& cf) {
      return (q - (priced_by_mean ? cf.mean : 0.0)) * x * x + u * u;
    };
    m.terminal_cost = [Q](double x) { return Q * x * x; };
    m.initial_density = gaussian(1.0, 1.0);
    m.u_min = -10.0;
    m.u_max = 10.0;
    m.control_gain = 1.0;
  } else if (cfg.name == "ou-benchmark") {
    m.drift = [](double, double x, double, const CouplingFeatures&) { return -x; };
    m.running_cost = [q](double, double x, double u, const CouplingFeatures&) { return q * x * x + u * u; };
    m.terminal_cost = [Q](double x) { return Q * x * x; };
    m.initial_density = gaussian(0.0, 1.0);
    m.u_min = -1.0;
    m.u_max = 1.0;
  } else if (cfg.name == "kuramoto") {
    m.drift = [beta](double, double x, double u, const CouplingFeatures& cf) {
      return u + beta * (cf.mean_sin * std::cos(x) - cf.mean_cos * std::sin(x));
    };
    m.running_cost = [q](double, double x, double u, const CouplingFeatures&) {
      return q * (1.0 - std::cos(x)) + u * u;
    };
    m.terminal_cost = [](double) { return 0.0; };
    m.initial_density = [](double) { return 1.0; };
    m.u_min = -5.0;
    m.u_max = 5.0;
  } else {
    throw std::invalid_argument("unknown scenario '" + cfg.name + "'");
  }
  return m;
}

LQSpec make_lq(const ScenarioConfig& cfg) {
  if (cfg.name != "affine-lq" && cfg.name != "mckean-vlasov") {
    throw std::invalid_argument(cfg.name + " has no linear-quadratic form");
  }
  LQSpec s;
  const double q = cfg.q;
  s.q = [q](double) { return q; };
  s.q_terminal = cfg.Q;
  s.b = 1.0;
  s.a = 0.0;
  s.sigma = cfg.sigma;
  s.epsilon = cfg.epsilon;
  s.rho_sq = cfg.delta / (2.0 * cfg.epsilon);
  s.beta = cfg.beta;
  if (cfg.name == "affine-lq") s.lambda_shift = [](double, double mean) { return mean; };
  const double m0 = initial_mean(cfg);
  s.coupling_mean = [m0](double) { return m0; };
  s.u_min = -10.0;
  s.u_max = 10.0;
  return s;
}

std::vector<double> kuramoto_frequencies(const ScenarioConfig& cfg, std::size_t n) {
  const CounterRng rng(cfg.seed);
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = cfg.Q * rng.normal(Stream::initial_state, j, 1);
  return w;
}

}  // namespace rsmfg

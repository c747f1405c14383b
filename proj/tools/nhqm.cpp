// nhqm <command> --config <path> [--out <path>] [--threads N] [--override key=value]...

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhqm/io.hpp"
#include "nhqm/nhqm.hpp"

using nlohmann::json;
using namespace nhqm;

namespace {

// ------------------------------------------------------------------ config schemas
// Every accepted key appears here with its default; anything else is rejected.

json defaults_for(const std::string& cmd) {
  if (cmd == "two_level")
    return {
        {"model", {{"s", 1.0}, {"theta", pi / 2}, {"phi", 0.0}}},
        {"grid", {{"z", {0.0, 0.2, 0.5, 0.8, 1.25, 1.5, 2.0}}, {"t_max", 10.0}, {"t_points", 201}}},
        {"tolerance", {{"occupancy", 1e-10}}},
    };
  if (cmd == "ancilla_verify")
    return {
        {"model", {{"r", 0.6}, {"s", 1.0}, {"theta", pi / 2}, {"phi", 0.0}, {"matrix", nullptr}}},
        {"initial_site", 0},
        {"grid", {{"t_max", 10.0}, {"t_points", 201}}},
        {"random", {{"instances", 20}, {"dim", 6}, {"seed", 20240611}}},
        {"tolerance", {{"two_level", 1e-10}, {"random", 1e-9}}},
    };
  if (cmd == "rlm_occupancy")
    return {
        {"model", {{"N", 2018}, {"J", 1.0}, {"gamma_abs", 0.2}}},
        {"grid", {{"phi_min", 0.0}, {"phi_max", pi / 2}, {"phi_points", 36}}},
        {"policies", {"Both", "None"}},
        {"zero_mode", "Average"},
    };
  if (cmd == "critical_scan")
    return {
        {"model", {{"N", 20002}, {"J", 1.0}, {"delta_s", 1e-8},
                   {"deltas", {0.2, 0.19, 0.15, 0.1, 0.05, 0.01, 0.002, 0.001}}}},
        {"grid", {{"m_max", 1250}}},
        {"windows",
         {{"long_lo_over_delta", 5.0}, {"long_hi_fraction_of_N", 0.0625}, {"intermediate_lo", 5},
          {"intermediate_hi_over_delta", 0.2}}},
        {"convergence",
         {{"enabled", true}, {"delta", 0.2}, {"delta_s", {1e-4, 1e-6, 1e-8}}, {"m", {10, 100}},
          {"N_min", 502}, {"N_max", 4000002}, {"factor", 1.25}, {"tolerance", 1e-3}}},
    };
  throw Error(ErrorKind::ConfigInvalid, "unknown command " + cmd);
}

bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return true;  // optional slot, any value
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return false;
}

void merge_into(json& base, const json& patch, const std::string& path) {
  require(patch.is_object(), ErrorKind::ConfigInvalid, "'" + path + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    require(base.contains(it.key()), ErrorKind::ConfigInvalid, "unknown config key '" + key + "'");
    json& slot = base[it.key()];
    require(same_kind(slot, it.value()), ErrorKind::ConfigInvalid, "wrong type for '" + key + "'");
    if (slot.is_object() && !slot.empty())
      merge_into(slot, it.value(), key);
    else
      slot = it.value();
  }
}

void apply_override(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  require(eq != std::string::npos && eq > 0, ErrorKind::ConfigInvalid,
          "override must look like key=value: " + kv);
  const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
    parts.push_back(rest.substr(0, pos));
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  merge_into(cfg, patch, "");
}

json load_config(const std::string& cmd, const std::string& path, const std::vector<std::string>& overrides) {
  json cfg = defaults_for(cmd);
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorKind::ConfigInvalid, "cannot read config " + path);
  json file = json::parse(f, nullptr, false, true);
  require(!file.is_discarded(), ErrorKind::ConfigInvalid, "config " + path + " is not valid JSON");
  require(file.is_object(), ErrorKind::ConfigInvalid, "config root must be an object");
  if (file.contains("command")) {
    require(file["command"] == cmd, ErrorKind::ConfigInvalid,
            "config is for command '" + file["command"].dump() + "', not '" + cmd + "'");
    file.erase("command");
  }
  merge_into(cfg, file, "");
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

void flatten(const json& j, const std::string& prefix, io::CsvTable& t) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) flatten(*it, key, t);
    else if (it->is_number_float()) t.meta(key, it->get<double>());
    else t.meta(key, it->dump());
  }
}

template <class T>
T positive(const json& j, const char* what) {
  const T v = j.get<T>();
  require(v > 0, ErrorKind::ConfigInvalid, std::string(what) + " must be positive");
  return v;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

struct RunOptions {
  std::string out;
  unsigned threads;
};

// ------------------------------------------------------------------ two_level

int cmd_two_level(const json& cfg, const RunOptions& opt) {
  const auto& m = cfg["model"];
  const auto& g = cfg["grid"];
  const auto ts = linspace(0.0, g["t_max"].get<double>(), positive<int>(g["t_points"], "grid.t_points"));
  const double tol = cfg["tolerance"]["occupancy"].get<double>();
  io::CsvTable t({"z", "t", "norm", "occupancy_closed", "occupancy_numeric"});
  t.meta("command", "two_level");
  flatten(cfg, "", t);
  Mat nL = Mat::Zero(2, 2);
  nL(0, 0) = 1.0;
  Vec up(2);
  up << 1.0, 0.0;
  double worst = 0;
  for (const auto& zj : g["z"]) {
    require(zj.is_number(), ErrorKind::ConfigInvalid, "grid.z entries must be numbers");
    TwoLevelParams p;
    p.s = m["s"].get<double>();
    p.theta = m["theta"].get<double>();
    p.phi = m["phi"].get<double>();
    require(std::abs(std::sin(p.theta)) > 1e-12, ErrorKind::ConfigInvalid, "sin(theta) must be nonzero");
    p.r = zj.get<double>() * p.s / std::sin(p.theta);
    const double z = p.z();
    require_not_exceptional(z);
    const Propagator U(biortho_decompose(two_level_hamiltonian(p)));
    for (double tt : ts) {
      const auto psi = evolve_state(U, PureState(up), tt);
      const double num = expval(nL, psi, Convention::hermitian()).real();
      const double closed = two_level_occupancy_closed(p, tt);
      worst = std::max(worst, std::abs(num - closed));
      t.add_row({z, tt, psi.norm2(), closed, num});
    }
  }
  t.meta("max_occupancy_deviation", worst);
  io::write_text(opt.out, t.str());
  if (!(worst <= tol)) {
    std::fprintf(stderr, "closed and numeric occupancy differ by %.3e (tolerance %.1e)\n", worst, tol);
    return 3;
  }
  return 0;
}

// ------------------------------------------------------------------ ancilla_verify

int cmd_ancilla_verify(const json& cfg, const RunOptions& opt) {
  const auto& m = cfg["model"];
  Mat H;
  if (!m["matrix"].is_null()) {
    H = io::matrix_from_json(m["matrix"]);
  } else {
    TwoLevelParams p{m["r"].get<double>(), m["s"].get<double>(), m["theta"].get<double>(),
                     m["phi"].get<double>()};
    H = two_level_hamiltonian(p);
  }
  const auto ts = linspace(0.0, cfg["grid"]["t_max"].get<double>(),
                           positive<int>(cfg["grid"]["t_points"], "grid.t_points"));
  const int site = cfg["initial_site"].get<int>();
  require(site >= 0 && site < H.rows(), ErrorKind::ConfigInvalid, "initial_site out of range");
  Vec psi0 = Vec::Zero(H.rows());
  psi0(site) = 1.0;

  const auto es = biortho_decompose(H);
  const auto cls = classify_spectrum(es);
  require(cls == SpectralClass::AllReal, ErrorKind::SpectrumNotReal,
          std::string("ancilla embedding needs an unbroken spectrum, got ") + to_string(cls));
  const auto emb = build_embedding(H);
  const double eq = verify_equivalence(emb, PureState(psi0), ts);
  const double sub = subspace_invariance_residual(emb, PureState(psi0), ts);
  const Eigen::VectorXd wsa = hermitian_eigenvalues(emb.H_sa);
  std::vector<double> doubled;
  for (Eigen::Index i = 0; i < es.dim(); ++i) doubled.insert(doubled.end(), 2, es.E(i).real());
  std::sort(doubled.begin(), doubled.end());
  double spec = 0;
  for (std::size_t i = 0; i < doubled.size(); ++i) spec = std::max(spec, std::abs(wsa(i) - doubled[i]));

  const auto& rc = cfg["random"];
  std::mt19937_64 rng(rc["seed"].get<std::uint64_t>());
  const int dim = positive<int>(rc["dim"], "random.dim");
  double r_eq = 0, r_sub = 0;
  const int count = rc["instances"].get<int>();
  for (int k = 0; k < count; ++k) {
    const Mat Hs = random_unbroken(dim, rng);
    const auto e = build_embedding(Hs);
    const PureState psi(random_state(dim, rng));
    r_eq = std::max(r_eq, verify_equivalence(e, psi, ts));
    r_sub = std::max(r_sub, subspace_invariance_residual(e, psi, ts));
  }
  const double tol = cfg["tolerance"]["two_level"].get<double>();
  const double rtol = cfg["tolerance"]["random"].get<double>();
  const bool pass = eq < tol && sub < tol && spec < tol && (count == 0 || std::max(r_eq, r_sub) < rtol);

  json report = {
      {"command", "ancilla_verify"},
      {"config", cfg},
      {"c", emb.c},
      {"H_s", io::matrix_to_json(H)},
      {"eta_r", io::matrix_to_json(emb.eta_r.matrix)},
      {"g", io::matrix_to_json(emb.g)},
      {"A", io::matrix_to_json(emb.A)},
      {"B", io::matrix_to_json(emb.B)},
      {"residuals", {{"equivalence", eq}, {"subspace_invariance", sub}, {"doubled_spectrum", spec}}},
      {"random", {{"instances", count}, {"dim", dim}, {"max_equivalence", r_eq}, {"max_subspace_invariance", r_sub}}},
      {"pass", pass},
  };
  io::write_text(opt.out, report.dump(2) + "\n");
  return pass ? 0 : 3;
}

// ------------------------------------------------------------------ rlm_occupancy

ComplexPairPolicy parse_pair_policy(const std::string& s) {
  for (auto p : {ComplexPairPolicy::None, ComplexPairPolicy::Both, ComplexPairPolicy::UpperOnly,
                 ComplexPairPolicy::LowerOnly})
    if (s == to_string(p)) return p;
  throw Error(ErrorKind::ConfigInvalid, "unknown complex-pair policy " + s);
}

ZeroMode parse_zero_mode(const std::string& s) {
  for (auto z : {ZeroMode::Occupy, ZeroMode::Empty, ZeroMode::Average})
    if (s == to_string(z)) return z;
  throw Error(ErrorKind::ConfigInvalid, "unknown zero_mode " + s);
}

int cmd_rlm_occupancy(const json& cfg, const RunOptions& opt) {
  const auto& m = cfg["model"];
  RLMParams tmpl;
  tmpl.N = m["N"].get<int>();
  tmpl.J = m["J"].get<double>();
  const double mag = m["gamma_abs"].get<double>();
  require(mag >= 0, ErrorKind::ConfigInvalid, "model.gamma_abs must be >= 0");
  const auto& g = cfg["grid"];
  const auto phis = linspace(g["phi_min"].get<double>(), g["phi_max"].get<double>(),
                             positive<int>(g["phi_points"], "grid.phi_points"));
  std::vector<OccupationPolicy> policies;
  const ZeroMode zm = parse_zero_mode(cfg["zero_mode"].get<std::string>());
  for (const auto& s : cfg["policies"]) {
    require(s.is_string(), ErrorKind::ConfigInvalid, "policies must be strings");
    OccupationPolicy pol;
    pol.complex_pair = parse_pair_policy(s.get<std::string>());
    pol.zero_mode = zm;
    pol.energy_unit = tmpl.J;
    policies.push_back(pol);
  }
  require(!policies.empty(), ErrorKind::ConfigInvalid, "at least one policy is needed");

  std::vector<std::vector<DotOccupancyRow>> rows(phis.size());
  parallel_for(phis.size(), opt.threads, [&](std::size_t k) {
    RLMParams p = tmpl;
    p.gamma = std::polar(mag, phis[k]);
    rows[k] = dot_occupancy_policies(p, policies);
  });

  io::CsvTable t({"phi", "policy", "spectral_class", "states", "hermitian", "biorthogonal", "biorthogonal_imag"});
  t.meta("command", "rlm_occupancy");
  flatten(cfg, "", t);
  for (std::size_t k = 0; k < phis.size(); ++k)
    for (std::size_t a = 0; a < policies.size(); ++a) {
      const auto& r = rows[k][a];
      t.add_row({phis[k], std::string(to_string(policies[a].complex_pair)), std::string(to_string(r.spectral_class)),
                 static_cast<long long>(r.states), r.hermitian, r.biorthogonal, r.biorthogonal_imag});
    }
  io::write_text(opt.out, t.str());
  return 0;
}

// ------------------------------------------------------------------ critical_scan

std::string sibling(const std::string& out, const std::string& suffix) {
  if (out.empty() || out == "-") return out;
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + suffix;
  return out.substr(0, dot) + suffix + out.substr(dot);
}

int cmd_critical_scan(const json& cfg, const RunOptions& opt) {
  const auto& m = cfg["model"];
  const int N = m["N"].get<int>();
  const double J = m["J"].get<double>();
  const double ds = m["delta_s"].get<double>();
  const int m_max = positive<int>(cfg["grid"]["m_max"], "grid.m_max");
  const auto& w = cfg["windows"];

  io::CsvTable green({"delta", "m", "S", "F", "S_pt", "F_pt", "dlog_S", "dlog_F", "dlog_S_pt", "dlog_F_pt"});
  io::CsvTable slopes({"delta", "window", "m_lo", "m_hi", "points", "slope_S", "slope_F", "dlog_S_pt_min",
                       "dlog_S_pt_max"});
  for (auto* t : {&green, &slopes}) {
    t->meta("command", "critical_scan");
    flatten(cfg, "", *t);
  }
  for (const auto& dj : m["deltas"]) {
    require(dj.is_number(), ErrorKind::ConfigInvalid, "model.deltas entries must be numbers");
    ChainParams p;
    p.N = N;
    p.J = J;
    p.delta = dj.get<double>();
    p.delta_s = ds;
    p.g = p.delta + ds;  // critical line: delta = g - delta_s
    const auto rows = critical_green_scan(p, m_max, opt.threads);
    for (const auto& r : rows)
      green.add_row({p.delta, static_cast<long long>(r.m), r.S, r.F, r.S_pt, r.F_pt, r.dlog_S, r.dlog_F,
                     r.dlog_S_pt, r.dlog_F_pt});

    auto add_window = [&](const char* name, int lo, int hi) {
      hi = std::min(hi, m_max);
      if (lo > hi) return;
      const auto s = loglog_slope(rows, lo, hi, [](const CriticalRow& r) { return r.S; });
      const auto f = loglog_slope(rows, lo, hi, [](const CriticalRow& r) { return r.F; });
      double dmin = NAN, dmax = NAN;
      for (const auto& r : rows)
        if (r.m >= lo && r.m <= hi && std::isfinite(r.dlog_S_pt)) {
          dmin = std::isnan(dmin) ? r.dlog_S_pt : std::min(dmin, r.dlog_S_pt);
          dmax = std::isnan(dmax) ? r.dlog_S_pt : std::max(dmax, r.dlog_S_pt);
        }
      slopes.add_row({p.delta, std::string(name), static_cast<long long>(lo), static_cast<long long>(hi),
                      static_cast<long long>(s.points), s.slope, f.slope, dmin, dmax});
    };
    add_window("intermediate", w["intermediate_lo"].get<int>(),
               static_cast<int>(std::floor(w["intermediate_hi_over_delta"].get<double>() * J / p.delta)));
    add_window("long_range", static_cast<int>(std::ceil(w["long_lo_over_delta"].get<double>() * J / p.delta)),
               static_cast<int>(std::floor(w["long_hi_fraction_of_N"].get<double>() * N)));
  }

  std::string text_green = green.str(), text_slopes = slopes.str(), text_conv;
  const auto& c = cfg["convergence"];
  if (c["enabled"].get<bool>()) {
    const auto sizes = geometric_sizes(c["N_min"].get<int>(), c["N_max"].get<int>(), c["factor"].get<double>());
    std::vector<int> ms;
    for (const auto& v : c["m"]) ms.push_back(v.get<int>());
    io::CsvTable conv({"delta_s", "N_converged", "minus_ln_delta_s"});
    conv.meta("command", "critical_scan");
    flatten(cfg, "", conv);
    std::vector<double> x, y;
    for (const auto& v : c["delta_s"]) {
      const double d = v.get<double>();
      const auto r = convergence_in_N(c["delta"].get<double>() + d, d, ms, sizes, c["tolerance"].get<double>(), J,
                                      opt.threads);
      conv.add_row({d, static_cast<long long>(r.N_converged), -std::log(d)});
      x.push_back(-std::log(d));
      y.push_back(r.N_converged);
    }
    if (x.size() >= 2) {
      const auto fit = linear_fit(x, y);
      conv.meta("linear_fit_slope", fit.slope);
      conv.meta("linear_fit_r2", fit.r2);
    }
    text_conv = conv.str();
  }

  if (opt.out.empty() || opt.out == "-") {
    io::write_text("", text_green + "\n" + text_slopes + (text_conv.empty() ? "" : "\n" + text_conv));
  } else {
    io::write_text(opt.out, text_green);
    io::write_text(sibling(opt.out, "_slopes"), text_slopes);
    if (!text_conv.empty()) io::write_text(sibling(opt.out, "_convergence"), text_conv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Hermitian PT-symmetric quantum mechanics toolkit"};
  app.require_subcommand(1);
  std::string config, out;
  unsigned threads = default_threads();
  std::vector<std::string> overrides;

  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const json&, const RunOptions&);
  };
  const Cmd cmds[] = {
      {"two_level", "norm and left-site occupancy of the two-level model", cmd_two_level},
      {"ancilla_verify", "ancilla embedding equivalence report (JSON)", cmd_ancilla_verify},
      {"rlm_occupancy", "resonant-level dot occupancy versus phase of gamma", cmd_rlm_occupancy},
      {"critical_scan", "staggered-chain critical Green functions and N(delta_s) table", cmd_critical_scan},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out, "output path (stdout if omitted)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--override", overrides, "dotted key=value, value parsed as JSON when possible");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  for (const auto& c : cmds) {
    if (!app.got_subcommand(c.name)) continue;
    try {
      const json cfg = load_config(c.name, config, overrides);
      return c.run(cfg, RunOptions{out, threads});
    } catch (const Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return exit_code_for(e.kind());
    } catch (const json::exception& e) {
      std::fprintf(stderr, "error: ConfigInvalid: %s\n", e.what());
      return 1;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 3;
    }
  }
  return 1;
}

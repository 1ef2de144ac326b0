#pragma once

// Subcommands of the qhankel tool. Everything is computed in long double and
// rendered through tables::TableArtifact so CSV and JSON share one layout.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qhankel/qbessel.hpp"
#include "qhankel/qcore.hpp"
#include "qhankel/sampling.hpp"
#include "qhankel/tables.hpp"
#include "qhankel/transforms.hpp"
#include "qhankel/zerofinder.hpp"

namespace qhankel::cli {

using Real = long double;
using tables::Cell;
using tables::TableArtifact;

enum exit_code : int { ok = 0, usage = 1, certification = 2 };

/// Raised for configuration errors; maps to exit code 1.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double q = 0.5;
  std::optional<double> nu;
  double c = 1.0;
  int terms = 4000;
  double series_tol = 1e-16;
  double root_tol = 1e-12;
  std::vector<int> m;
  int K = 4;
  std::string f;
  std::string format = "csv";
  std::string out;

  QContext context() const { return QContext(q, series_tol, terms, root_tol); }
};

/// f-spec: "0", "t", "t^alpha", or "file:PATH" with lines "t value".
/// Tabulated functions are looked up at the Jackson nodes only.
inline GridFunction<Real> parse_function(const std::string& spec, double q) {
  if (spec == "0") return GridFunction<Real>::zero();
  if (spec == "t") return GridFunction<Real>::monomial(1.0L);
  if (spec.rfind("t^", 0) == 0) {
    double alpha = 0;
    const char* first = spec.data() + 2;
    const char* last = spec.data() + spec.size();
    const auto res = std::from_chars(first, last, alpha);
    if (res.ec != std::errc() || res.ptr != last) throw usage_error("bad monomial exponent in f-spec '" + spec + "'");
    auto g = GridFunction<Real>::monomial(static_cast<Real>(alpha));
    return GridFunction<Real>([g](Real t) { return g(t); }, spec);
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open grid file '" + path + "'");
    std::map<long, Real> by_node;
    std::string line;
    const double lq = std::log(q);
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      ls.imbue(std::locale::classic());
      long double t = 0, v = 0;
      if (!(ls >> t >> v) || !(t > 0 && t <= 1)) throw usage_error("bad grid line '" + line + "'");
      const double i = std::round(std::log(static_cast<double>(t)) / lq);
      if (std::abs(static_cast<double>(t) / std::pow(q, i) - 1.0) > 1e-9)
        throw usage_error("grid point " + std::to_string(static_cast<double>(t)) + " is not a node q^k");
      by_node[static_cast<long>(i)] = v;
    }
    return GridFunction<Real>(
        [by_node, lq, q](Real t) {
          const double i = std::round(std::log(static_cast<double>(t)) / lq);
          const auto it = by_node.find(static_cast<long>(i));
          if (it == by_node.end() || std::abs(static_cast<double>(t) / std::pow(q, i) - 1.0) > 1e-9)
            return std::numeric_limits<Real>::quiet_NaN();
          return it->second;
        },
        spec);
  }
  throw usage_error("unknown f-spec '" + spec + "' (use 0, t, t^alpha or file:PATH)");
}

inline void stamp(TableArtifact& t, const RunConfig& cfg, const std::string& command, const std::string& kind,
                  double nu) {
  std::string ms;
  for (std::size_t i = 0; i < cfg.m.size(); ++i) ms += (i ? ";" : "") + std::to_string(cfg.m[i]);
  t.provenance = {{"command", command},
                  {"kind", kind},
                  {"f", cfg.f.empty() ? "none" : cfg.f},
                  {"q", tables::format_number(cfg.q)},
                  {"nu", tables::format_number(nu)},
                  {"c", tables::format_number(cfg.c)},
                  {"terms", std::to_string(cfg.terms)},
                  {"series_tol", tables::format_number(cfg.series_tol)},
                  {"root_tol", tables::format_number(cfg.root_tol)},
                  {"K", std::to_string(cfg.K)},
                  {"m", ms.empty() ? "none" : ms}};
  std::string canon;
  for (const auto& [k, v] : t.provenance) canon += k + '=' + v + ';';
  t.provenance.emplace_back("config_hash", tables::hex64(tables::fnv1a(canon)));
}

inline nlohmann::ordered_json to_json(const TableArtifact& t) {
  nlohmann::ordered_json j;
  j["schema"] = "qhankel-artifact/1";
  auto& prov = j["provenance"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.provenance) prov[k] = v;
  j["columns"] = t.columns;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto& c = r[i];
      auto& slot = o[t.columns[i]];
      switch (c.kind) {
        case Cell::Kind::number: {
          // round-trip the 9-digit rendering so CSV and JSON agree
          const std::string s = c.render();
          double v = 0;
          if (std::from_chars(s.data(), s.data() + s.size(), v).ec == std::errc() && std::isfinite(v))
            slot = v;
          else
            slot = s;
          break;
        }
        case Cell::Kind::integer: slot = c.integer; break;
        case Cell::Kind::text: slot = c.text; break;
        case Cell::Kind::absent: slot = nullptr; break;
      }
    }
    rows.push_back(std::move(o));
  }
  j["failures"] = t.failures;
  return j;
}

inline void write(std::ostream& os, const TableArtifact& t, const std::string& format) {
  if (format == "json")
    os << to_json(t).dump(2) << '\n';
  else
    tables::write_csv(os, t);
}

/// --out, else $QHANKEL_OUT_DIR/<name>.<format>, else stdout.
inline void emit(const TableArtifact& t, const RunConfig& cfg, const std::string& name, std::ostream& out,
                 std::ostream& err) {
  std::string path = cfg.out;
  if (path.empty()) {
    if (const char* dir = std::getenv("QHANKEL_OUT_DIR"); dir && *dir) {
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      path = (std::filesystem::path(dir) / (name + "." + cfg.format)).string();
    }
  }
  if (path.empty()) {
    write(out, t, cfg.format);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw usage_error("cannot write '" + path + "'");
  write(file, t, cfg.format);
  err << "wrote " << path << '\n';
}

inline std::vector<double> z_grid(double lo, double hi, int points, bool interior) {
  std::vector<double> zs;
  for (int i = 0; i < points; ++i) {
    if (interior)
      zs.push_back(lo + (hi - lo) * (i + 0.5) / points);
    else
      zs.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  }
  return zs;
}

inline double default_nu(const std::string& kind) {
  return kind == "F" || kind == "cross" || kind == "Y" ? 0.25 : 1.0;
}

inline std::string default_f(const std::string& kind) {
  if (kind == "F") return "t^0.25";
  if (kind == "U" || kind == "V") return "t^2";
  return "t^1.5";
}

inline TableArtifact cmd_eval(RunConfig cfg, const std::string& kind, const std::vector<double>& zs) {
  const double nu = cfg.nu.value_or(default_nu(kind));
  const auto ctx = cfg.context();
  const Real q2 = static_cast<Real>(cfg.q) * static_cast<Real>(cfg.q);
  const BesselOrder order(nu);
  std::function<Real(Real)> eval;
  if (kind == "J") {
    cfg.f.clear();
    const HahnExton<Real> j(static_cast<Real>(nu), q2, ctx);
    eval = [j](Real z) { return j.value(z); };
  } else if (kind == "Y") {
    cfg.f.clear();
    detail::require_Y_order(nu);
    const SecondKind<Real> y(static_cast<Real>(nu), q2, ctx);
    eval = [y](Real z) { return y.value(z); };
  } else if (kind == "cross") {
    cfg.f.clear();
    const CrossKernel<Real> k(KernelSpec::cross(nu, ctx, cfg.c));
    eval = [k](Real z) { return k.value(z); };
  } else {
    if (cfg.f.empty()) cfg.f = default_f(kind);
    const auto f = parse_function(cfg.f, cfg.q);
    const TransformKind tk = kind == "H" ? TransformKind::H
                             : kind == "U" ? TransformKind::U
                             : kind == "V" ? TransformKind::V
                                           : TransformKind::F;
    const TransformEvaluator<Real> t(tk, f, order, ctx, cfg.c);
    eval = [t](Real z) { return t(z); };
  }
  TableArtifact a;
  a.columns = {"z", "value", "status"};
  for (double z : zs) {
    try {
      const Real v = eval(static_cast<Real>(z));
      a.rows.push_back({Cell::num(z), Cell::num(static_cast<double>(v)), Cell::str("ok")});
    } catch (const numeric_error& e) {
      a.rows.push_back({Cell::num(z), Cell::absent(), Cell::str(std::string(to_string(e.code())))});
    }
  }
  stamp(a, cfg, "eval", kind, nu);
  return a;
}

/// The first K zeros; on scan exhaustion the longest prefix that was found
/// is returned with a failure line.
inline TableArtifact cmd_zeros(RunConfig cfg, const std::string& kernel, int max_scan_steps) {
  cfg.f.clear();
  const double nu = cfg.nu.value_or(kernel == "cross" ? 0.25 : 1.0);
  const auto ctx = cfg.context();
  const KernelSpec spec = kernel == "cross" ? KernelSpec::cross(nu, ctx, cfg.c) : KernelSpec::j_kernel(nu, ctx);
  ZeroScanOptions opt;
  opt.max_scan_steps = max_scan_steps;
  TableArtifact a;
  a.columns = {"k", "zero", "q_zero", "residual", "derivative", "bracket_lo", "bracket_hi"};
  std::optional<ZeroTable<Real>> table;
  for (std::size_t n = static_cast<std::size_t>(std::max(cfg.K, 0)); !table; --n) {
    try {
      table = find_zeros<Real>(spec, n, opt);
    } catch (const numeric_error& e) {
      if (a.failures.empty()) a.failures.push_back(e.what());
      if (n == 0) throw;
    }
  }
  for (std::size_t k = 1; k <= table->size(); ++k) {
    const Real z = table->at(k);
    a.rows.push_back({Cell::integral(static_cast<long long>(k)), Cell::num(static_cast<double>(z)),
                      Cell::num(static_cast<double>(static_cast<Real>(cfg.q) * z)),
                      Cell::num(static_cast<double>(table->residual[k - 1])),
                      Cell::num(static_cast<double>(table->derivative[k - 1])),
                      Cell::num(static_cast<double>(table->bracket[k - 1].first)),
                      Cell::num(static_cast<double>(table->bracket[k - 1].second))});
  }
  stamp(a, cfg, "zeros", kernel, nu);
  return a;
}

/// Sup-norm error of the truncated sampling series against the transform on
/// points interior to [zmin, zmax] (interior so no point lands on a node).
inline TableArtifact cmd_sampling_error(RunConfig cfg, const std::string& kind, std::optional<double> zmin,
                                        std::optional<double> zmax, int points, bool positive_only) {
  if (kind != "H" && kind != "F") throw usage_error("sampling-error: --kind must be H or F");
  const double nu = cfg.nu.value_or(default_nu(kind));
  if (cfg.f.empty()) cfg.f = default_f(kind);
  if (cfg.m.empty()) throw usage_error("sampling-error: --m needs at least one truncation order");
  for (int m : cfg.m)
    if (m < 0) throw usage_error("sampling-error: truncation orders must be >= 0");
  const auto ctx = cfg.context();
  const auto f = parse_function(cfg.f, cfg.q);
  const BesselOrder order(nu);
  const Real q = static_cast<Real>(cfg.q);
  const std::size_t m_max = static_cast<std::size_t>(*std::max_element(cfg.m.begin(), cfg.m.end()));
  const std::size_t count = std::max<std::size_t>(m_max, 5);
  const KernelSpec spec = kind == "H" ? KernelSpec::j_kernel(nu, ctx) : KernelSpec::cross(nu, ctx, cfg.c);
  const auto table = find_zeros<Real>(spec, count);
  const double hi = zmax.value_or(static_cast<double>(kind == "H" ? q * table.at(5) : table.at(5)));
  const auto zs = z_grid(zmin.value_or(0.5), hi, points, true);
  const TransformEvaluator<Real> direct(kind == "H" ? TransformKind::H : TransformKind::F, f, order, ctx, cfg.c);
  std::vector<Real> exact;
  for (double z : zs) exact.push_back(direct(static_cast<Real>(z)));

  TableArtifact a;
  a.columns = {"m", "sup_error", "at_z", "points"};
  for (int m : cfg.m) {
    const auto mu = static_cast<std::size_t>(m);
    Real worst = 0, at = zs.empty() ? 0 : static_cast<Real>(zs.front());
    if (kind == "H") {
      const auto s = build_H_series(f, order, table, mu, ctx);
      for (std::size_t i = 0; i < zs.size(); ++i) {
        const Real e = std::abs(eval_H_series(s, static_cast<Real>(zs[i])) - exact[i]);
        if (e > worst) worst = e, at = static_cast<Real>(zs[i]);
      }
    } else {
      const auto s = build_F_series(f, order, cfg.c, table, mu, ctx,
                                    positive_only ? FSeriesTerms::positive_zeros_only : FSeriesTerms::all_zeros);
      for (std::size_t i = 0; i < zs.size(); ++i) {
        const Real e = std::abs(eval_F_series(s, static_cast<Real>(zs[i])) - exact[i]);
        if (e > worst) worst = e, at = static_cast<Real>(zs[i]);
      }
    }
    a.rows.push_back({Cell::integral(m), Cell::num(static_cast<double>(worst)), Cell::num(static_cast<double>(at)),
                      Cell::integral(static_cast<long long>(zs.size()))});
  }
  stamp(a, cfg, "sampling-error", positive_only ? kind + ":positive-zeros-only" : kind, nu);
  return a;
}

inline std::vector<Cell> record_cells(const IntervalRecord<Real>& r) {
  const auto& s = r.scan;
  const auto fz = r.transform_zero();
  return {Cell::integral(static_cast<long long>(r.k)),
          Cell::num(static_cast<double>(r.lo)),
          Cell::num(static_cast<double>(r.hi)),
          Cell::str(to_string(r.tag)),
          Cell::integral(s.sign_lo),
          Cell::integral(s.sign_hi),
          Cell::integral(s.sign_changes),
          s.zero ? Cell::num(static_cast<double>(*s.zero)) : Cell::absent(),
          s.zero ? Cell::num(static_cast<double>(s.residual)) : Cell::absent(),
          Cell::str(to_string(s.certification)),
          Cell::str(s.endpoints_excluded ? "yes" : "no"),
          fz ? Cell::num(static_cast<double>(*fz)) : Cell::absent()};
}

/// Localization report. m0 = 0 means: take it from the coefficient stream.
inline TableArtifact cmd_localize(RunConfig cfg, const std::string& kind, int m0_arg) {
  if (kind != "H" && kind != "F") throw usage_error("localize: --kind must be H or F");
  if (cfg.K < 1) throw usage_error("localize: --K must be >= 1");
  const double nu = cfg.nu.value_or(default_nu(kind));
  if (cfg.f.empty()) cfg.f = default_f(kind);
  const auto ctx = cfg.context();
  const auto f = parse_function(cfg.f, cfg.q);
  const BesselOrder order(nu);
  const std::size_t K = static_cast<std::size_t>(cfg.K);
  const std::size_t count = std::max<std::size_t>(K + 1, 4) + 2;

  LocalizationReport<Real> rep;
  std::size_t m0 = 1;
  if (kind == "H") {
    const auto table = find_zeros<Real>(KernelSpec::j_kernel(nu, ctx), count);
    rep = localize_H_zeros(f, order, table, K, ctx);
  } else {
    const auto table = find_zeros<Real>(KernelSpec::cross(nu, ctx, cfg.c), count);
    if (m0_arg > 0) {
      m0 = static_cast<std::size_t>(m0_arg);
    } else {
      const auto stream = coefficient_stream_b(f, order, cfg.c, table, count - 1, ctx);
      std::optional<std::size_t> detected;
      try {
        detected = alternation_scan(stream);
      } catch (const numeric_error&) {
      }
      m0 = detected.value_or(1);
    }
    rep = localize_F_zeros(f, order, cfg.c, table, K, m0, ctx);
  }

  TableArtifact a;
  a.columns = {"k",      "lo",       "hi",           "tag",   "sign_lo",     "sign_hi",    "sign_changes",
               "zero",   "residual", "certification", "endpoints_excluded", "transform_zero"};
  if (rep.origin) {
    auto o = *rep.origin;
    o.k = 0;
    a.rows.push_back(record_cells(o));
  }
  for (const auto& r : rep.intervals) {
    a.rows.push_back(record_cells(r));
    if (r.tag == IntervalTag::theorem && !r.certified()) a.failures.push_back("interval k=" + std::to_string(r.k));
  }
  if (!rep.hypothesis_holds) a.failures.push_back("hypothesis: " + rep.hypothesis_note);
  stamp(a, cfg, "localize", kind, nu);
  a.provenance.insert(a.provenance.end() - 1, {"m0", std::to_string(rep.m0)});
  if (rep.detected_m0) a.provenance.insert(a.provenance.end() - 1, {"detected_m0", std::to_string(*rep.detected_m0)});
  return a;
}

inline void add_context_options(CLI::App* sub, RunConfig& cfg, bool need_q) {
  auto* q = sub->add_option("--q", cfg.q, "q in (0,1)");
  if (need_q) q->required();
  sub->add_option("--nu", cfg.nu, "Bessel order");
  sub->add_option("--c", cfg.c, "cross-kernel constant")->capture_default_str();
  sub->add_option("--terms", cfg.terms, "cap on series and q-integral terms")->capture_default_str();
  sub->add_option("--tol", cfg.series_tol, "relative series truncation tolerance")->capture_default_str();
  sub->add_option("--root-tol", cfg.root_tol, "absolute root tolerance")->capture_default_str();
  sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--out", cfg.out, "output path (default: $QHANKEL_OUT_DIR/<name>.<format> or stdout)");
}

/// The whole tool; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"q-Bessel functions, q-Hankel transforms, sampling series and zero localization"};
  app.require_subcommand(1);
  RunConfig cfg;

  std::string eval_kind;
  double zmin = 0.1, zmax = 10;
  int points = 100;
  std::vector<double> zlist;
  auto* eval = app.add_subcommand("eval", "evaluate a kernel or transform over a z-grid");
  add_context_options(eval, cfg, true);
  eval->add_option("--kind", eval_kind, "J, Y, cross, H, U, V or F")
      ->required()
      ->check(CLI::IsMember({"J", "Y", "cross", "H", "U", "V", "F"}));
  eval->add_option("--f", cfg.f, "f-spec: 0, t, t^alpha or file:PATH");
  eval->add_option("--zmin", zmin)->capture_default_str();
  eval->add_option("--zmax", zmax)->capture_default_str();
  eval->add_option("--points", points, "grid size, endpoints included")->capture_default_str();
  eval->add_option("--z", zlist, "explicit z values (overrides the grid)")->delimiter(',');

  std::string kernel = "J";
  int max_scan_steps = 400000;
  auto* zeros = app.add_subcommand("zeros", "tabulate kernel zeros");
  add_context_options(zeros, cfg, true);
  zeros->add_option("--kernel", kernel, "J or cross")->check(CLI::IsMember({"J", "cross"}))->capture_default_str();
  zeros->add_option("--K", cfg.K, "number of zeros")->capture_default_str();
  zeros->add_option("--max-scan-steps", max_scan_steps)->capture_default_str();

  int which = 0;
  double guard = 1e-4;
  auto* table = app.add_subcommand("table", "regenerate one of the three published tables");
  add_context_options(table, cfg, false);
  table->add_option("which", which, "1, 2 or 3")->required()->check(CLI::IsMember({1, 2, 3}));
  table->add_option("--guard", guard, "relative guard band for containment")->capture_default_str();

  std::string se_kind = "H";
  std::optional<double> se_zmin, se_zmax;
  int se_points = 50;
  bool positive_only = false;
  auto* se = app.add_subcommand("sampling-error", "sup error of truncated sampling series");
  add_context_options(se, cfg, true);
  se->add_option("--kind", se_kind, "H or F")->check(CLI::IsMember({"H", "F"}))->capture_default_str();
  se->add_option("--f", cfg.f, "f-spec: 0, t, t^alpha or file:PATH");
  se->add_option("--m", cfg.m, "truncation orders, e.g. 10,20,40")->delimiter(',')->required();
  se->add_option("--zmin", se_zmin, "grid start (default 0.5)");
  se->add_option("--zmax", se_zmax, "grid end (default: fifth sampling node)");
  se->add_option("--points", se_points)->capture_default_str();
  se->add_flag("--positive-zeros-only", positive_only, "F: leave out the zeros on the imaginary axis");

  std::string loc_kind = "H";
  int m0 = 0;
  auto* loc = app.add_subcommand("localize", "certify transform zeros between kernel zeros");
  add_context_options(loc, cfg, true);
  loc->add_option("--kind", loc_kind, "H or F")->check(CLI::IsMember({"H", "F"}))->capture_default_str();
  loc->add_option("--f", cfg.f, "f-spec: 0, t, t^alpha or file:PATH");
  loc->add_option("--K", cfg.K, "number of intervals")->capture_default_str();
  loc->add_option("--m0", m0, "F: alternation index, 0 = detect")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  }

  try {
    TableArtifact a;
    std::string name;
    if (*eval) {
      if (points < 0) throw usage_error("eval: --points must be >= 0");
      const auto zs = zlist.empty() ? z_grid(zmin, zmax, points, false) : zlist;
      for (double z : zs)
        if (!(z > 0)) throw usage_error("eval: z values must be positive");
      a = cmd_eval(cfg, eval_kind, zs);
      name = "eval-" + eval_kind;
    } else if (*zeros) {
      if (cfg.K < 0) throw usage_error("zeros: --K must be >= 0");
      a = cmd_zeros(cfg, kernel, max_scan_steps);
      name = "zeros-" + kernel;
    } else if (*table) {
      tables::TableConfig tc;
      tc.series_tol = cfg.series_tol;
      tc.max_terms = cfg.terms;
      tc.root_tol = cfg.root_tol;
      tc.guard_band = guard;
      QContext(0.5, tc.series_tol, tc.max_terms, tc.root_tol);  // validates
      a = tables::make_table(which, tc);
      name = "table" + std::to_string(which);
      err << "table " << which << ": max relative difference to the printed values "
          << tables::format_number(a.max_rel_diff()) << '\n';
    } else if (*se) {
      a = cmd_sampling_error(cfg, se_kind, se_zmin, se_zmax, se_points, positive_only);
      name = "sampling-error-" + se_kind;
    } else if (*loc) {
      a = cmd_localize(cfg, loc_kind, m0);
      name = "localize-" + loc_kind;
    }
    emit(a, cfg, name, out, err);
    for (const auto& f : a.failures) err << "certification failure: " << f << '\n';
    return a.ok() ? ok : certification;
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const numeric_error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == errc::domain_error || e.code() == errc::integer_order_unsupported ? usage : certification;
  }
}

}  // namespace qhankel::cli

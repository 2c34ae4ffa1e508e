#include "di2pc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "di2pc/adversary.hpp"
#include "di2pc/bounds.hpp"
#include "di2pc/chsh.hpp"
#include "di2pc/device.hpp"
#include "di2pc/jordan.hpp"
#include "di2pc/parallel.hpp"
#include "di2pc/protocols.hpp"
#include "di2pc/random.hpp"

namespace di2pc::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Output {
  Json json;
  std::optional<Table> table;
  int code = kExitOk;
  std::string failure_detail;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  std::string tol_profile = "default";
  unsigned threads = 0;
  std::string config;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string num(std::int64_t v) { return std::to_string(v); }

std::string bits(const protocols::Bits& b) {
  std::string s;
  s.reserve(b.size());
  for (auto v : b) s.push_back(v ? '1' : '0');
  return s;
}

Json interval_json(const protocols::Interval& i) { return Json::array({i.lo, i.hi}); }

Tolerances tolerances_for(const Globals& g) {
  return g.tol_profile == "strict" ? Tolerances::strict() : default_tolerances();
}

/// "ideal", "ideal:Q" or a path to a device JSON file.
DeviceModel resolve_device(const std::string& spec, const Tolerances& tol) {
  if (spec == "ideal") return ideal_bb84_device();
  if (spec.rfind("ideal:", 0) == 0) {
    double q = 0.0;
    const std::string rest = spec.substr(6);
    const auto r = std::from_chars(rest.data(), rest.data() + rest.size(), q);
    if (r.ec != std::errc() || r.ptr != rest.data() + rest.size())
      throw ParseError("device: bad noise value in " + spec);
    return ideal_bb84_device(q);
  }
  return load_device(spec, tol);
}

// ζ from exactly one of --S and --zeta.
struct ZetaArgs {
  double s = 0.0;
  double zeta = 0.0;
  CLI::Option* s_opt = nullptr;
  CLI::Option* zeta_opt = nullptr;

  void add(CLI::App* sub) {
    s_opt = sub->add_option("--S", s, "CHSH value in [2, 2√2]; converted to ζ");
    zeta_opt = sub->add_option("--zeta", zeta, "certificate ζ in [0, 1]");
  }
  double resolve() const {
    const bool has_s = s_opt->count() > 0, has_z = zeta_opt->count() > 0;
    if (has_s == has_z) throw UsageError("give exactly one of --S and --zeta");
    if (has_z) return zeta;
    if (s < 2.0 - 1e-12) throw DomainError("S must be >= 2");
    return chsh::zeta_from_violation(s).zeta;
  }
  void annotate(Json& j) const {
    if (s_opt->count() > 0) j["S"] = s;
  }
};

Json failure_list_json(const std::vector<adversary::LemmaFailure>& fs) {
  Json arr = Json::array();
  for (const auto& f : fs) arr.push_back(Json{{"trial", f.trial}, {"detail", f.detail}, {"instance", f.instance}});
  return arr;
}

Json key_lemma_json(const adversary::KeyLemmaReport& r) {
  Json j;
  j["suite"] = "key-lemma";
  j["passed"] = r.passed();
  j["trials"] = r.trials;
  j["n"] = r.n;
  j["d"] = r.d;
  j["gamma"] = r.gamma;
  j["evaluations"] = r.evaluations;
  j["max_ratio"] = r.max_ratio;
  j["max_ratio_trial"] = r.max_ratio_trial;
  j["anchor_value"] = r.anchor_value;
  j["anchor_bound"] = r.anchor_bound;
  j["anchor_ratio"] = r.anchor_bound > 0 ? r.anchor_value / r.anchor_bound : 0.0;
  Json arr = Json::array();
  for (const auto& f : r.failures)
    arr.push_back(Json{{"trial", f.trial}, {"strategy", f.strategy}, {"value", f.value},
                       {"bound", f.bound}, {"eps_plus", f.eps_plus}, {"device", f.device}});
  j["failures"] = arr;
  return j;
}

Json norm_lemma_json(const adversary::NormLemmaReport& r, Index max_dim, int max_terms) {
  Json j;
  j["suite"] = "norm-lemma";
  j["passed"] = r.passed();
  j["trials"] = r.trials;
  j["max_dim"] = max_dim;
  j["max_terms"] = max_terms;
  j["min_slack"] = r.min_slack;
  j["failures"] = failure_list_json(r.failures);
  return j;
}

Json overlap_lemma_json(const adversary::OverlapLemmaReport& r, int n, Index max_d) {
  Json j;
  j["suite"] = "overlap-lemma";
  j["passed"] = r.passed();
  j["trials"] = r.trials;
  j["n"] = n;
  j["max_d"] = max_d;
  j["checks"] = r.checks;
  j["min_slack_angles"] = r.min_slack_angles;
  j["min_slack_epsilon"] = r.min_slack_epsilon;
  j["max_form_difference"] = r.max_form_difference;
  j["failures"] = failure_list_json(r.failures);
  return j;
}

void write_csv(std::ostream& os, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// --config run.json: keys mirror long flag names; explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw ParseError("config: top level must be an object");

  std::vector<std::string> out;
  if (cfg.contains("command")) {
    std::vector<std::string> cmd;
    const auto& c = cfg["command"];
    if (c.is_string()) {
      std::istringstream ss(c.get<std::string>());
      for (std::string w; ss >> w;) cmd.push_back(w);
    } else if (c.is_array()) {
      for (const auto& w : c) cmd.push_back(w.get<std::string>());
    } else {
      throw ParseError("config: command must be a string or an array");
    }
    if (!cmd.empty() && std::find(args.begin(), args.end(), cmd.front()) == args.end())
      out.insert(out.end(), cmd.begin(), cmd.end());
  }
  out.insert(out.end(), args.begin(), args.end());
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command" || key == "config") continue;
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.push_back(flag);
      out.push_back(joined);
    } else if (value.is_number()) {
      out.push_back(flag);
      out.push_back(value.dump());
    } else {
      throw ParseError("config: unsupported value for " + key);
    }
  }
  return out;
}

void emit_error(std::ostream& err, std::string_view kind, const std::string& detail) {
  err << Json{{"error", kind}, {"detail", detail}}.dump() << "\n";
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::verification:
      return kExitVerification;
    case ErrorKind::dimension_cap:
    case ErrorKind::round_cap:
      return kExitCap;
    default:
      return kExitUsage;
  }
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Globals g;
  std::function<Output()> action;
  bool csv_by_extension = false;

  CLI::App app{"Device-independent two-party cryptography: bounds, simulation and verification", "di2pc"};
  app.require_subcommand(1);
  app.fallthrough();
  auto* format_opt = app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", g.seed, "master seed (env DI2PC_SEED)")->envname("DI2PC_SEED");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--tol-profile", g.tol_profile, "default or strict")
      ->check(CLI::IsMember({"default", "strict"}));
  app.add_option("--threads", g.threads, "worker threads, 0 = all cores");
  app.add_option("--config", g.config, "JSON file whose keys mirror the flags");

  // bound ------------------------------------------------------------------
  struct {
    std::int64_t n = 1;
    std::uint64_t d = 1;
    double gamma = 0.0;
    std::string report = "guessing";
    ZetaArgs z;
  } bound;
  {
    auto* sub = app.add_subcommand("bound", "closed-form bounds for one (n, d, ζ, γ)");
    sub->add_option("--n", bound.n)->required();
    sub->add_option("--d", bound.d)->required();
    sub->add_option("--gamma", bound.gamma);
    sub->add_option("--report", bound.report, "guessing, wse-ne or pv");
    bound.z.add(sub);
    sub->callback([&] {
      action = [&] {
        const auto kind = bounds::parse_report_kind(bound.report);
        if (!kind) throw UsageError("unknown report kind " + bound.report);
        const bounds::BoundInput in{bound.n, bound.d, bound.z.resolve(), bound.gamma};
        in.validate();
        const auto r = bounds::make_report(in, *kind);
        Output o;
        o.json["kind"] = std::string(bounds::to_string(r.kind));
        o.json["n"] = in.n;
        o.json["d"] = in.d;
        bound.z.annotate(o.json);
        o.json["zeta"] = in.zeta;
        o.json["gamma"] = in.gamma;
        o.json["threshold_t"] = r.threshold_t;
        o.json["b_perfect"] = r.b_perfect;
        o.json["b_imperfect"] = r.b_imperfect;
        o.json["log2_b_imperfect"] = r.log2_b_imperfect;
        o.json["minentropy_rate"] = r.minentropy_rate;
        o.json["secure"] = r.secure;
        Table t;
        t.header = {"kind", "n", "d", "zeta", "gamma", "threshold_t", "b_perfect", "b_imperfect",
                    "log2_b_imperfect", "minentropy_rate", "secure"};
        t.rows.push_back({std::string(bounds::to_string(r.kind)), num(in.n), std::to_string(in.d),
                          num(in.zeta), num(in.gamma), num(r.threshold_t), num(r.b_perfect),
                          num(r.b_imperfect), num(r.log2_b_imperfect), num(r.minentropy_rate),
                          r.secure ? "1" : "0"});
        o.table = std::move(t);
        return o;
      };
    });
  }

  // region -----------------------------------------------------------------
  struct {
    std::size_t s_steps = 101;
    std::size_t gamma_steps = 101;
  } region;
  {
    auto* sub = app.add_subcommand("region", "secure (S, γ) region and its boundary γ*(S)");
    sub->add_option("--s-steps", region.s_steps)->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    sub->add_option("--gamma-steps", region.gamma_steps)->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    sub->callback([&] {
      csv_by_extension = true;
      action = [&] {
        const auto s = bounds::linspace(2.0, chsh::kTsirelson, region.s_steps);
        const auto gm = bounds::linspace(0.0, 0.5, region.gamma_steps);
        const auto r = bounds::security_region(s, gm);
        Output o;
        o.json["s_grid"] = r.s_grid;
        o.json["gamma_grid"] = r.gamma_grid;
        o.json["zeta"] = r.zeta;
        o.json["gamma_star"] = r.gamma_star;
        Json sec = Json::array();
        for (const auto& row : r.secure) sec.push_back(row);
        o.json["secure"] = sec;
        Table t;
        t.header = {"S", "gamma", "zeta", "secure", "gamma_star"};
        for (std::size_t i = 0; i < r.s_grid.size(); ++i)
          for (std::size_t k = 0; k < r.gamma_grid.size(); ++k)
            t.rows.push_back({num(r.s_grid[i]), num(r.gamma_grid[k]), num(r.zeta[i]),
                              r.secure[i][k] ? "1" : "0", num(r.gamma_star[i])});
        o.table = std::move(t);
        return o;
      };
    });
  }

  // min-n ------------------------------------------------------------------
  struct {
    std::uint64_t d = 1;
    double gamma = 0.0;
    double eps = 0.0;
    std::int64_t n_cap = bounds::kDefaultRoundCap;
    ZetaArgs z;
  } minn;
  {
    auto* sub = app.add_subcommand("min-n", "fewest rounds reaching a target bound");
    sub->add_option("--d", minn.d)->required();
    sub->add_option("--gamma", minn.gamma);
    sub->add_option("--eps", minn.eps)->required();
    sub->add_option("--n-cap", minn.n_cap);
    minn.z.add(sub);
    sub->callback([&] {
      action = [&] {
        const double zeta = minn.z.resolve();
        const auto r = bounds::min_rounds(minn.d, zeta, minn.gamma, minn.eps, minn.n_cap);
        Output o;
        o.json["d"] = minn.d;
        minn.z.annotate(o.json);
        o.json["zeta"] = zeta;
        o.json["gamma"] = minn.gamma;
        o.json["eps"] = minn.eps;
        if (r.n) {
          o.json["n"] = *r.n;
          o.json["locally_monotone"] = r.locally_monotone;
        } else {
          o.json["insecure"] = true;
        }
        Table t;
        t.header = {"d", "zeta", "gamma", "eps", "n", "insecure"};
        t.rows.push_back({std::to_string(minn.d), num(zeta), num(minn.gamma), num(minn.eps),
                          r.n ? num(*r.n) : "", r.n ? "0" : "1"});
        o.table = std::move(t);
        return o;
      };
    });
  }

  // curve ------------------------------------------------------------------
  struct {
    std::uint64_t d = 1;
    double gamma = 0.0;
    double eps = 0.0;
    std::size_t s_steps = 50;
    std::int64_t n_cap = bounds::kDefaultRoundCap;
  } curve;
  {
    auto* sub = app.add_subcommand("curve", "minimum rounds as a function of S");
    sub->add_option("--d", curve.d)->required();
    sub->add_option("--gamma", curve.gamma);
    sub->add_option("--eps", curve.eps)->required();
    sub->add_option("--s-steps", curve.s_steps)->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    sub->add_option("--n-cap", curve.n_cap);
    sub->callback([&] {
      csv_by_extension = true;
      action = [&] {
        bounds::BoundInput{1, curve.d, 0.0, curve.gamma}.validate();
        if (!(curve.eps > 0.0 && curve.eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
        Output o;
        o.json["d"] = curve.d;
        o.json["gamma"] = curve.gamma;
        o.json["eps"] = curve.eps;
        Json pts = Json::array();
        Table t;
        t.header = {"S", "zeta", "n", "status"};
        for (double s : bounds::linspace(2.0, chsh::kTsirelson, curve.s_steps)) {
          const double zeta = chsh::zeta_from_violation(s).zeta;
          Json p{{"S", s}, {"zeta", zeta}};
          std::string status = "ok";
          std::string n_cell;
          try {
            const auto r = bounds::min_rounds(curve.d, zeta, curve.gamma, curve.eps, curve.n_cap);
            if (r.n) {
              p["n"] = *r.n;
              n_cell = num(*r.n);
            } else {
              p["n"] = nullptr;
              status = "insecure";
            }
          } catch (const RoundCapError&) {
            p["n"] = nullptr;
            status = "cap";
          }
          p["status"] = status;
          pts.push_back(p);
          t.rows.push_back({num(s), num(zeta), n_cell, status});
        }
        o.json["points"] = pts;
        o.table = std::move(t);
        return o;
      };
    });
  }

  // chsh -------------------------------------------------------------------
  struct {
    std::string device = "ideal";
    std::int64_t rounds = 10000;
    double delta = 0.01;
  } chs;
  {
    auto* sub = app.add_subcommand("chsh", "sampled CHSH test and its certificate");
    sub->add_option("--device", chs.device, "device JSON path, ideal or ideal:Q");
    sub->add_option("--rounds", chs.rounds, "rounds per setting");
    sub->add_option("--delta", chs.delta, "failure probability of the interval");
    sub->callback([&] {
      action = [&] {
        const auto dev = resolve_device(chs.device, tolerances_for(g));
        const auto e = chsh::estimate_chsh(dev, chs.rounds, chs.delta, g.seed);
        const auto z = e.conservative_zeta();
        Output o;
        o.json["s_hat"] = e.s_hat;
        o.json["half_width"] = e.half_width;
        o.json["zeta_conservative"] = z.zeta;
        o.json["certified"] = z.certified;
        o.json["rounds_per_setting"] = e.rounds_per_setting;
        o.json["delta"] = e.confidence_delta;
        o.json["correlators"] = Json::array({Json::array({e.correlators[0][0], e.correlators[0][1]}),
                                             Json::array({e.correlators[1][0], e.correlators[1][1]})});
        o.json["s_exact"] = chsh::chsh_value(chsh::ChshSetup::from_device(dev));
        Table t;
        t.header = {"s_hat", "half_width", "zeta_conservative", "certified", "rounds_per_setting", "delta"};
        t.rows.push_back({num(e.s_hat), num(e.half_width), num(z.zeta), z.certified ? "1" : "0",
                          num(e.rounds_per_setting), num(e.confidence_delta)});
        o.table = std::move(t);
        return o;
      };
    });
  }

  // jordan -----------------------------------------------------------------
  struct {
    std::string device = "ideal";
    std::string side = "alice";
  } jor;
  {
    auto* sub = app.add_subcommand("jordan", "Jordan blocks of a device's measurement pair");
    sub->add_option("--device", jor.device, "device JSON path, ideal or ideal:Q");
    sub->add_option("--side", jor.side, "alice or bob")->check(CLI::IsMember({"alice", "bob"}));
    sub->callback([&] {
      action = [&] {
        const auto dev = resolve_device(jor.device, tolerances_for(g));
        const bool alice = jor.side == "alice";
        const auto& m0 = alice ? dev.alice_meas_0 : dev.bob_meas_0;
        const auto& m1 = alice ? dev.alice_meas_1 : dev.bob_meas_1;
        const DensityOperator sigma = alice ? dev.sigma_a() : dev.sigma_b();
        const auto dec = jordan::decompose_pair(m0, m1);
        const auto p = jordan::block_probabilities(dec, sigma);
        Output o;
        Json blocks = Json::array();
        Table t;
        t.header = {"block", "dim", "beta", "p"};
        for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
          blocks.push_back(Json{{"dim", dec.blocks[i].block_dim}, {"beta", dec.blocks[i].beta}, {"p", p[i]}});
          t.rows.push_back({std::to_string(i), std::to_string(dec.blocks[i].block_dim),
                            num(dec.blocks[i].beta), num(p[i])});
        }
        o.json["blocks"] = blocks;
        o.json["epsilon_plus"] = jordan::epsilon_plus_blocks(dec, sigma);
        o.json["epsilon_plus_direct"] = jordan::epsilon_plus_direct(m0, m1, sigma);
        o.table = std::move(t);
        return o;
      };
    });
  }

  // simulate ---------------------------------------------------------------
  struct {
    std::string device = "ideal";
    std::int64_t n = 100;
    std::int64_t runs = 1;
    std::int64_t test_rounds = 0;
    double delta = 0.01;
    double gamma = 0.0;
    double v1 = 0.0, v2 = 1.0, claim = 0.5, dt = 1.0, time_tol = 1e-9, prover = 0.0;
    CLI::Option* claim_opt = nullptr;
    CLI::Option* dt_opt = nullptr;
    CLI::Option* prover_opt = nullptr;
    std::int64_t trials = 100;
  } sim;
  {
    auto* simulate = app.add_subcommand("simulate", "honest protocol runs");
    simulate->require_subcommand(1);

    auto* wse = simulate->add_subcommand("wse", "weak string erasure");
    wse->add_option("--device", sim.device);
    wse->add_option("--n", sim.n);
    wse->add_option("--runs", sim.runs)->check(CLI::PositiveNumber);
    wse->add_option("--test-rounds", sim.test_rounds, "CHSH rounds per setting, 0 skips");
    wse->add_option("--delta", sim.delta);
    wse->callback([&] {
      action = [&] {
        const auto dev = resolve_device(sim.device, tolerances_for(g));
        const protocols::TestPhase test{sim.test_rounds, sim.delta};
        Output o;
        if (sim.runs == 1) {
          const auto tr = protocols::run_wse(dev, sim.n, g.seed, test);
          o.json["n"] = sim.n;
          o.json["theta"] = bits(tr.theta);
          o.json["x"] = bits(tr.x);
          o.json["theta_prime"] = bits(tr.theta_prime);
          o.json["x_prime"] = bits(tr.x_prime);
          o.json["index_set"] = tr.index_set;
          o.json["substring"] = bits(tr.substring);
          o.json["substring_matches"] = tr.substring_matches();
          o.json["matched_errors"] = tr.matched_errors();
          o.json["matched_qber"] = tr.matched_qber();
          if (tr.test)
            o.json["test"] = Json{{"s_hat", tr.test->estimate.s_hat},
                                  {"half_width", tr.test->estimate.half_width},
                                  {"zeta_conservative", tr.test->zeta.zeta}};
          else
            o.json["test"] = nullptr;
          return o;
        }
        struct Slot {
          bool match = false;
          std::int64_t matched = 0, errors = 0;
        };
        std::vector<Slot> slots(static_cast<std::size_t>(sim.runs));
        parallel_for(slots.size(), g.threads, [&](std::size_t i) {
          const auto tr = protocols::run_wse(dev, sim.n, child_seed(g.seed, i), test);
          slots[i] = {tr.substring_matches(), static_cast<std::int64_t>(tr.index_set.size()), tr.matched_errors()};
        });
        std::int64_t matches = 0, matched = 0, errors = 0;
        for (const auto& s : slots) {
          matches += s.match;
          matched += s.matched;
          errors += s.errors;
        }
        o.json["runs"] = sim.runs;
        o.json["n"] = sim.n;
        o.json["match_rate"] = static_cast<double>(matches) / static_cast<double>(sim.runs);
        o.json["match_ci"] = interval_json(protocols::wilson_interval(matches, sim.runs));
        o.json["mean_index_size"] = static_cast<double>(matched) / static_cast<double>(sim.runs);
        o.json["matched_qber"] = matched > 0 ? static_cast<double>(errors) / static_cast<double>(matched) : 0.0;
        return o;
      };
    });

    auto* pv = simulate->add_subcommand("pv", "one-dimensional position verification");
    pv->add_option("--device", sim.device);
    pv->add_option("--n", sim.n);
    pv->add_option("--gamma", sim.gamma);
    pv->add_option("--v1", sim.v1);
    pv->add_option("--v2", sim.v2);
    sim.claim_opt = pv->add_option("--claim", sim.claim, "claimed position (default midpoint)");
    sim.dt_opt = pv->add_option("--dt", sim.dt, "accepted round-trip time (default v2 - v1)");
    pv->add_option("--time-tol", sim.time_tol);
    sim.prover_opt = pv->add_option("--prover", sim.prover, "actual prover position");
    pv->add_option("--test-rounds", sim.test_rounds);
    pv->add_option("--delta", sim.delta);
    pv->callback([&] {
      action = [&] {
        const auto dev = resolve_device(sim.device, tolerances_for(g));
        protocols::PvConfig cfg;
        cfg.pos_v1 = sim.v1;
        cfg.pos_v2 = sim.v2;
        cfg.pos_claimed = sim.claim_opt->count() ? sim.claim : (sim.v1 + sim.v2) / 2;
        cfg.delta_t = sim.dt_opt->count() ? sim.dt : sim.v2 - sim.v1;
        cfg.n = sim.n;
        cfg.gamma = sim.gamma;
        cfg.time_tol = sim.time_tol;
        if (sim.prover_opt->count()) cfg.prover_pos = sim.prover;
        cfg.test = {sim.test_rounds, sim.delta};
        const auto tr = protocols::run_pv(dev, cfg, g.seed);
        Output o;
        o.json["n"] = cfg.n;
        o.json["gamma"] = cfg.gamma;
        o.json["theta"] = bits(tr.theta);
        o.json["x"] = bits(tr.x);
        o.json["y"] = bits(tr.y);
        o.json["qber"] = tr.qber;
        o.json["radius"] = bounds::hamming_radius(cfg.n, cfg.gamma);
        o.json["rt_v1"] = tr.rt_v1;
        o.json["rt_v2"] = tr.rt_v2;
        o.json["delta_t"] = cfg.delta_t;
        o.json["accepted"] = tr.accepted;
        if (tr.test)
          o.json["test"] = Json{{"s_hat", tr.test->estimate.s_hat},
                                {"half_width", tr.test->estimate.half_width},
                                {"zeta_conservative", tr.test->zeta.zeta}};
        else
          o.json["test"] = nullptr;
        return o;
      };
    });

    auto* comp = simulate->add_subcommand("completeness", "acceptance statistics over many runs");
    comp->add_option("--device", sim.device);
    comp->add_option("--n", sim.n);
    comp->add_option("--gamma", sim.gamma);
    comp->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
    comp->callback([&] {
      action = [&] {
        const auto dev = resolve_device(sim.device, tolerances_for(g));
        const auto r = protocols::completeness_report(dev, sim.n, sim.gamma, sim.trials, g.seed, g.threads);
        Output o;
        o.json["trials"] = r.trials;
        o.json["n"] = r.n;
        o.json["gamma"] = r.gamma;
        o.json["wse_match_rate"] = r.wse_match_rate;
        o.json["wse_match_ci"] = interval_json(r.wse_match_ci);
        o.json["pv_accept_rate"] = r.pv_accept_rate;
        o.json["pv_accept_ci"] = interval_json(r.pv_accept_ci);
        o.json["empirical_qber"] = r.empirical_qber;
        o.json["qber_ci"] = interval_json(r.qber_ci);
        return o;
      };
    });
  }

  // attack -----------------------------------------------------------------
  struct {
    std::string device = "ideal";
    std::string strategy = "breidbart";
    int n = 1;
    Index d = 1;
    double gamma = 0.0;
    std::vector<int> keep;
    std::vector<double> angles;
    double angle = std::numbers::pi / 4;
    int restarts = 4;
    int steps = 60;
    CLI::Option* keep_opt = nullptr;
    CLI::Option* angles_opt = nullptr;
  } att;
  {
    auto* sub = app.add_subcommand("attack", "exact win probability of an explicit attack");
    sub->add_option("--device", att.device);
    sub->add_option("--strategy", att.strategy,
                    "breidbart, measure, store-subset, store-all, seesaw or file:STRAT.json");
    sub->add_option("--n", att.n);
    sub->add_option("--d", att.d);
    sub->add_option("--gamma", att.gamma);
    att.keep_opt = sub->add_option("--keep", att.keep, "stored rounds, 0-based")->delimiter(',');
    att.angles_opt = sub->add_option("--angles", att.angles, "one basis angle per round")->delimiter(',');
    sub->add_option("--angle", att.angle, "angle for measured rounds when --angles is absent");
    sub->add_option("--restarts", att.restarts, "seesaw restarts");
    sub->add_option("--steps", att.steps, "seesaw steps per restart");
    sub->callback([&] {
      action = [&] {
        const auto dev = resolve_device(att.device, tolerances_for(g));
        if (att.n < 1) throw DomainError("n must be >= 1");
        std::vector<double> angles = att.angles;
        if (!att.angles_opt->count()) angles.assign(static_cast<std::size_t>(att.n), att.angle);
        adversary::AttackStrategy strat;
        adversary::GuessResult res;
        Json extra;
        if (att.strategy == "seesaw") {
          adversary::SeesawOptions so;
          so.restarts = att.restarts;
          so.steps = att.steps;
          so.gamma = att.gamma;
          auto ss = adversary::seesaw_search(dev, att.n, att.d, g.seed, so);
          strat = std::move(ss.strategy);
          res = std::move(ss.best);
          extra["restart_values"] = ss.restart_values;
        } else {
          if (att.strategy == "breidbart") {
            strat = adversary::AttackStrategy::breidbart(att.n);
          } else if (att.strategy == "measure") {
            strat = adversary::AttackStrategy::measure_all(angles);
          } else if (att.strategy == "store-all") {
            strat = adversary::AttackStrategy::store_all(att.n);
          } else if (att.strategy == "store-subset") {
            std::vector<int> keep = att.keep;
            if (!att.keep_opt->count()) {
              // As many leading rounds as fit in the memory.
              for (Index cap = 2; cap <= att.d && static_cast<int>(keep.size()) < att.n; cap *= 2)
                keep.push_back(static_cast<int>(keep.size()));
            }
            strat = adversary::AttackStrategy::store_subset(keep, angles);
          } else if (att.strategy.rfind("file:", 0) == 0) {
            std::ifstream in(att.strategy.substr(5));
            if (!in) throw ParseError("strategy: cannot open " + att.strategy.substr(5));
            nlohmann::json j;
            try {
              in >> j;
            } catch (const nlohmann::json::exception& e) {
              throw ParseError(std::string("strategy: ") + e.what());
            }
            strat = adversary::strategy_from_json(j);
          } else {
            throw UsageError("unknown strategy " + att.strategy);
          }
          res = adversary::exact_win_probability(dev, strat, att.n, att.d, att.gamma);
        }
        const double eps = jordan::epsilon_plus_blocks(
            jordan::decompose_pair(dev.alice_meas_0, dev.alice_meas_1), dev.sigma_a());
        const double bound = bounds::bound_imperfect(att.n, static_cast<std::uint64_t>(att.d),
                                                     std::clamp(eps, 0.0, 1.0), att.gamma);
        Output o;
        o.json["strategy"] = strat.label();
        o.json["n"] = att.n;
        o.json["d"] = att.d;
        o.json["gamma"] = att.gamma;
        o.json["win_prob"] = res.win_prob;
        o.json["per_theta"] = res.per_theta;
        o.json["certified_gap"] = res.certified_gap;
        o.json["converged"] = res.converged;
        o.json["eps_plus"] = eps;
        o.json["bound_imperfect"] = bound;
        o.json["within_bound"] = res.win_prob <= bound + 1e-6;
        for (auto& [k, v] : extra.items()) o.json[k] = v;
        o.json["strategy_spec"] = adversary::strategy_to_json(strat);
        return o;
      };
    });
  }

  // verify -----------------------------------------------------------------
  struct {
    std::int64_t trials = 100;
    int n = 1;
    Index d = 1;
    double gamma = 0.0;
    Index max_dim = 16;
    int max_terms = 8;
    int overlap_n = 2;
    Index max_d = 3;
    adversary::KeyLemmaOptions key;
  } ver;
  {
    auto* verify = app.add_subcommand("verify", "fuzz the inequalities behind the bound");
    verify->require_subcommand(1);
    auto add_common = [&](CLI::App* s) { s->add_option("--trials", ver.trials)->check(CLI::NonNegativeNumber); };
    auto add_key = [&](CLI::App* s) {
      s->add_option("--n", ver.n);
      s->add_option("--d", ver.d);
      s->add_option("--gamma", ver.gamma);
      s->add_option("--angle-steps", ver.key.angle_steps);
      s->add_option("--seesaw-restarts", ver.key.seesaw_restarts);
      s->add_option("--seesaw-steps", ver.key.seesaw_steps);
    };
    auto add_norm = [&](CLI::App* s) {
      s->add_option("--max-dim", ver.max_dim);
      s->add_option("--max-terms", ver.max_terms);
    };
    auto add_overlap = [&](CLI::App* s) {
      s->add_option("--overlap-n", ver.overlap_n);
      s->add_option("--max-d", ver.max_d);
    };
    auto run_key = [&] {
      ver.key.threads = g.threads;
      return key_lemma_json(adversary::verify_key_lemma(ver.trials, ver.n, ver.d, ver.gamma, g.seed, ver.key));
    };
    auto run_norm = [&] {
      return norm_lemma_json(adversary::verify_norm_lemma(ver.trials, ver.max_dim, ver.max_terms, g.seed, g.threads),
                             ver.max_dim, ver.max_terms);
    };
    auto run_overlap = [&] {
      return overlap_lemma_json(
          adversary::verify_overlap_lemma(ver.trials, ver.overlap_n, ver.max_d, g.seed, g.threads),
          ver.overlap_n, ver.max_d);
    };
    auto finish = [](Json j) {
      Output o;
      o.json = std::move(j);
      if (!o.json["passed"].get<bool>()) {
        o.code = kExitVerification;
        o.failure_detail = "verification failed";
      }
      return o;
    };

    auto* key = verify->add_subcommand("key-lemma", "attack values against the security bound");
    add_common(key);
    add_key(key);
    key->callback([&, run_key, finish] { action = [run_key, finish] { return finish(run_key()); }; });

    auto* norm = verify->add_subcommand("norm-lemma", "norm of a sum of PSD operators");
    add_common(norm);
    add_norm(norm);
    norm->callback([&, run_norm, finish] { action = [run_norm, finish] { return finish(run_norm()); }; });

    auto* ov = verify->add_subcommand("overlap-lemma", "overlap of basis-string projections");
    add_common(ov);
    ov->add_option("--n", ver.overlap_n);
    ov->add_option("--d", ver.max_d, "largest memory dimension");
    ov->callback([&, run_overlap, finish] { action = [run_overlap, finish] { return finish(run_overlap()); }; });

    auto* all = verify->add_subcommand("all", "all three suites");
    add_common(all);
    add_key(all);
    add_norm(all);
    add_overlap(all);
    all->callback([&, run_key, run_norm, run_overlap, finish] {
      action = [run_key, run_norm, run_overlap, finish] {
        Json j;
        Json suites = Json::array({run_key(), run_norm(), run_overlap()});
        bool passed = true;
        for (const auto& s : suites) passed = passed && s["passed"].get<bool>();
        j["passed"] = passed;
        j["suites"] = suites;
        return finish(j);
      };
    });
  }

  // device -----------------------------------------------------------------
  struct {
    std::string kind = "ideal";
    double noise = 0.0;
  } devc;
  {
    auto* sub = app.add_subcommand("device", "write a device JSON");
    sub->add_option("--kind", devc.kind, "ideal or random")->check(CLI::IsMember({"ideal", "random"}));
    sub->add_option("--noise", devc.noise, "depolarizing strength of the B wire");
    sub->callback([&] {
      action = [&] {
        DeviceModel dev = ideal_bb84_device(devc.noise);
        if (devc.kind == "random") {
          RandomSuite rng(g.seed);
          dev = random_device(rng);
          dev.noise_q = devc.noise;
          dev.validate();
        }
        Output o;
        o.json = device_to_json(dev);
        return o;
      };
    });
  }

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> storage{"di2pc"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      emit_error(err, "usage", e.what());
      return kExitUsage;
    }
    if (!action) throw UsageError("no subcommand selected");

    Output o = action();
    if (format_opt->count() == 0 && csv_by_extension && g.out.size() >= 4 &&
        g.out.compare(g.out.size() - 4, 4, ".csv") == 0)
      g.format = "csv";

    std::ostringstream body;
    if (g.format == "csv") {
      if (!o.table) throw UsageError("csv output is not available for this subcommand");
      write_csv(body, *o.table);
    } else {
      body << o.json.dump(2) << "\n";
    }
    if (g.out.empty() || g.out == "-") {
      out << body.str();
    } else {
      std::ofstream f(g.out, std::ios::binary);
      if (!f) throw ParseError("cannot write " + g.out);
      f << body.str();
      if (!f) throw ParseError("cannot write " + g.out);
    }
    if (o.code != kExitOk) emit_error(err, "verification", o.failure_detail);
    return o.code;
  } catch (const UsageError& e) {
    emit_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    emit_error(err, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return kExitUsage;
  }
}

}  // namespace di2pc::cli

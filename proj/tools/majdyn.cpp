// SPDX-License-Identifier: Apache-2.0
//
// Command line front end: single runs, analytic predictions, validation
// campaigns, degree-model sampling and the enumeration evaluators.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "majdyn/analytic.hpp"
#include "majdyn/degree_models.hpp"
#include "majdyn/dynamics.hpp"
#include "majdyn/enumeration.hpp"
#include "majdyn/graph.hpp"
#include "majdyn/harness.hpp"
#include "majdyn/report_io.hpp"

using namespace majdyn;
using nlohmann::json;

namespace {

std::string coloring_string(const Coloring& c) {
  std::string s(c.size(), 'R');
  for (std::size_t v = 0; v < c.size(); ++v)
    if (c.opinions[v] == Opinion::kBlue) s[v] = 'B';
  return s;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw IoError("cannot open '" + out + "' for writing");
  f << j.dump(2) << '\n';
}

json summary_json(const DegreeSummary& s) { return {{"sum", s.sum}, {"variance", s.variance}, {"max", s.max}}; }

EnumCase parse_case(const std::string& s) {
  if (s == "graph") return EnumCase::kGraph;
  if (s == "bipartite") return EnumCase::kBipartite;
  throw InvalidInput("case must be 'graph' or 'bipartite'");
}

struct SimulateOpts {
  ModelParams params{1000, 0, 0.5};
  std::uint64_t seed = 20261018;
  long max_steps = kDefaultMaxSteps;
  bool colorings = false;
  std::string out;
};

int do_simulate(const SimulateOpts& o) {
  const auto g = sample_gnp(o.params, o.seed);
  const auto t = run(g, initial_coloring(o.params), o.max_steps);
  json j = {{"n", o.params.n},
            {"delta", o.params.delta},
            {"p", o.params.p},
            {"seed", o.seed},
            {"outcome", t.outcome.describe()},
            {"steps", t.steps()},
            {"lead_history", t.lead_history}};
  if (t.colorings.size() >= 2) {
    const auto typ = typicality_check(g, t, o.params);
    j["typicality"] = {{"x_prime", typ.x_prime}, {"y_prime", typ.y_prime}, {"e3", typ.e3}, {"e4", typ.e4()}};
  }
  if (o.colorings) {
    json cs = json::array();
    for (const auto& c : t.colorings) cs.push_back(coloring_string(c));
    j["colorings"] = std::move(cs);
  }
  emit(j, o.out);
  return 0;
}

struct PredictOpts {
  ModelParams params{1000, 0, 0.5};
  std::optional<long> lead1;
  std::optional<long> r2;
};

int do_predict(const PredictOpts& o) {
  o.params.validate_open();
  const double n = static_cast<double>(o.params.n);
  const auto c = day_one_centering(o.params);
  const auto chop = chop_moments_approx(n, o.params.p);
  json j = {{"n", o.params.n},
            {"delta", o.params.delta},
            {"p", o.params.p},
            {"win_probability", win_probability(o.params)},
            {"in_theorem_regime", in_theorem_regime(o.params)},
            {"day_one",
             {{"x_center", c.x_center},
              {"y_center", c.y_center},
              {"scale", c.scale},
              {"peak", day_one_peak(n)},
              {"correlation", kDayOneCorrelation}}},
            {"chop_moments", {{"mean_plus", chop.mean_plus}, {"mean_minus", chop.mean_minus}, {"variance", chop.variance}}}};
  if (o.lead1) {
    const auto d = day_two_expectations(o.params, *o.lead1);
    j["day_two"] = {{"lead1", *o.lead1}, {"eta", d.eta}, {"r2", d.e_r2}, {"r0_r2", d.e_r0_r2}, {"b0_r2", d.e_b0_r2}};
  }
  if (o.r2) {
    const auto m = day_three_margin(o.params, *o.r2, o.params.num_vertices() - *o.r2);
    j["day_three"] = {{"margin", m.predicted_margin}, {"threshold", m.threshold}, {"safe", m.safe}};
  }
  emit(j, "");
  return 0;
}

struct ValidateOpts {
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::optional<unsigned> threads;
  std::optional<long> n, delta;
  std::optional<double> p;
  std::string out;
  std::vector<std::string> tolerances;
  bool keep_raw = false;
};

int do_validate(const ValidateOpts& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig::defaults(parse_experiment(o.experiment))
                                             : load_config(o.config_path);
  if (!o.config_path.empty()) c.experiment = parse_experiment(o.experiment);
  if (o.config_path.empty()) c.threads = std::max(1u, std::thread::hardware_concurrency());
  if (o.seed) c.master_seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.threads) c.threads = *o.threads;
  if (o.n) c.params.n = *o.n;
  if (o.delta) c.params.delta = *o.delta;
  if (o.p) c.params.p = *o.p;
  if (!o.out.empty()) c.output_path = o.out;
  if (o.keep_raw) c.keep_raw = true;
  for (const auto& kv : o.tolerances) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidInput("--tol expects name=value");
    c.tolerances[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  c.validate();

  const auto report = run_experiment(c);
  for (const auto& row : report.rows)
    std::cout << (row.pass ? "PASS " : "FAIL ") << row.name << "  empirical=" << row.empirical
              << " analytic=" << row.analytic << " |err|=" << row.abs_error << " tol=" << row.tolerance << '\n';
  std::cout << "runtime_ms=" << report.runtime_ms << '\n';
  if (!c.output_path.empty()) write_report(report, c.output_path);
  return report.all_pass() ? 0 : 1;
}

struct ModelsOpts {
  std::string model = "I";
  long n = 1000;
  long m = 0;
  double p = 0.5;
  std::uint64_t seed = 20261018;
  long samples = 1;
  bool bipartite = false;
  bool degrees = false;
};

int do_models(const ModelsOpts& o) {
  json draws = json::array();
  for (long i = 0; i < o.samples; ++i) {
    const auto seed = derive_seed(o.seed, static_cast<std::uint64_t>(i));
    SamplerStats st;
    json d;
    if (o.bipartite) {
      const long m = o.m > 0 ? o.m : o.n;
      BipartiteDegreeSequence b;
      if (o.model == "true")
        b = sample_true_bip(m, o.n, o.p, seed);
      else if (o.model == "B")
        b = sample_B_bip(m, o.n, o.p, seed);
      else if (o.model == "E")
        b = sample_E_bip(m, o.n, o.p, seed, &st);
      else if (o.model == "I")
        b = sample_I_bip(m, o.n, o.p, seed, &st);
      else
        throw InvalidInput("model must be one of true, B, E, I");
      d = {{"s", summary_json(summarize(b.s))}, {"t", summary_json(summarize(b.t))}};
      if (o.degrees) d["degrees"] = {{"s", b.s}, {"t", b.t}};
    } else {
      DegreeSequence s;
      if (o.model == "true")
        s = sample_true(o.n, o.p, seed);
      else if (o.model == "B")
        s = sample_B(o.n, o.p, seed);
      else if (o.model == "E")
        s = sample_E(o.n, o.p, seed, &st);
      else if (o.model == "I")
        s = sample_I(o.n, o.p, seed, &st);
      else
        throw InvalidInput("model must be one of true, B, E, I");
      d = summary_json(summarize(s.degrees));
      if (o.degrees) d["degrees"] = s.degrees;
    }
    if (st.attempts > 0) d["attempts"] = st.attempts;
    if (o.model == "I") d["p_used"] = st.p_used;
    draws.push_back(std::move(d));
  }
  emit({{"model", o.model}, {"bipartite", o.bipartite}, {"n", o.n}, {"p", o.p}, {"seed", o.seed}, {"draws", draws}}, "");
  return 0;
}

struct EnumerateOpts {
  std::string method;
  std::vector<long> degrees, s, t;
  std::string which = "graph";
  long n = 1000, m = 0, r = 0, d = 0, h = 0, slice = 0;
  std::optional<long> t_value;
  double p = 0.5, alpha = 0.0, gamma = 0.0, beta_width = 0.5;
  std::vector<double> betas, values;
  std::uint64_t seed = 20261018;
  long samples = 20000;
  std::string mode = "exact";
};

int do_enumerate(const EnumerateOpts& o) {
  json j = {{"method", o.method}};
  auto inputs = [&] {
    BalancedDegreeInputs in;
    in.beta = o.betas.empty() ? detail::uniform_betas(o.n, o.beta_width, o.seed) : o.betas;
    in.h = o.h > 0 ? o.h : o.n / 2;
    in.alpha = o.alpha;
    in.gamma = o.gamma;
    in.m = o.m > 0 ? o.m : o.n;
    return in;
  };
  auto put = [&](const ConditionalDegree& c) {
    j["value"] = c.value;
    j["log_value"] = c.log_value;
    j["std_error"] = c.std_error;
    j["tail_envelope"] = c.tail_envelope;
    j["hypotheses_ok"] = c.hypotheses_ok;
    if (!c.notes.empty()) j["notes"] = c.notes;
  };
  if (o.method == "count") {
    if (!o.s.empty() || !o.t.empty())
      j["count"] = exact_count_bigraphs(o.s, o.t).str();
    else
      j["count"] = exact_count_graphs(o.degrees).str();
  } else if (o.method == "mw") {
    const auto e = mw_log_count(o.degrees);
    j["log_count"] = e.log_count;
    j["in_band"] = e.in_band;
  } else if (o.method == "cgm") {
    const auto e = cgm_log_count(o.s, o.t);
    j["log_count"] = e.log_count;
    j["in_band"] = e.in_band;
  } else if (o.method == "ratio") {
    const auto b = binomial_ratio_approx(parse_case(o.which), o.m, o.n, o.r, o.d, o.p);
    j["exact_log_ratio"] = b.exact_log_ratio;
    j["approx_log_ratio"] = b.approx_log_ratio;
    j["in_band"] = b.in_band;
  } else if (o.method == "balanced") {
    put(cond_degree_balanced(parse_case(o.which), inputs(), o.n, o.p));
  } else if (o.method == "bounded" || o.method == "expectation") {
    if (!o.t_value) throw InvalidInput("--t-value is required");
    const auto in = inputs();
    put(o.method == "bounded" ? cond_degree_bounded(parse_case(o.which), in, o.n, o.p, *o.t_value)
                              : expectation_form(parse_case(o.which), in, o.n, o.p, *o.t_value, o.samples, o.seed));
  } else if (o.method == "slice") {
    if (o.mode != "exact" && o.mode != "approx") throw InvalidInput("--mode must be exact or approx");
    j["value"] = slice_exp_moment(o.values, o.slice, o.mode == "exact" ? SliceMode::kExact : SliceMode::kApprox);
  } else {
    throw InvalidInput("unknown method '" + o.method + "'");
  }
  emit(j, "");
  return 0;
}

void add_params(CLI::App* cmd, ModelParams& p) {
  cmd->add_option("--n", p.n, "blue vertices; red has n + delta");
  cmd->add_option("--delta", p.delta, "initial red surplus");
  cmd->add_option("--p", p.p, "edge probability");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Majority dynamics on dense random graphs"};
  app.require_subcommand(1);
  int status = 0;

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "run one trajectory and dump it as JSON");
  add_params(simulate, sim.params);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--max-steps", sim.max_steps);
  simulate->add_flag("--colorings", sim.colorings, "include every coloring as an R/B string");
  simulate->add_option("--out", sim.out, "write JSON here instead of stdout");
  simulate->callback([&] { status = do_simulate(sim); });

  PredictOpts pred;
  auto* predict = app.add_subcommand("predict", "print analytic predictions");
  add_params(predict, pred.params);
  predict->add_option("--lead1", pred.lead1, "day-one lead |R1| - |B1|");
  predict->add_option("--r2", pred.r2, "|R2|, for the day-three margin");
  predict->callback([&] { status = do_predict(pred); });

  ValidateOpts val;
  auto* validate = app.add_subcommand("validate", "run a validation campaign");
  std::vector<std::string> names;
  for (const auto& [e, name] : kExperimentNames) names.emplace_back(name);
  validate->add_option("experiment", val.experiment)->required()->check(CLI::IsMember(names));
  validate->add_option("--config", val.config_path)->check(CLI::ExistingFile);
  validate->add_option("--seed", val.seed);
  validate->add_option("--trials", val.trials);
  validate->add_option("--threads", val.threads);
  validate->add_option("--n", val.n);
  validate->add_option("--delta", val.delta);
  validate->add_option("--p", val.p);
  validate->add_option("--out", val.out, "report path (JSON); CSV files are written next to it");
  validate->add_option("--tol", val.tolerances, "override a tolerance, name=value");
  validate->add_flag("--keep-raw", val.keep_raw, "store per-trial data in the report");
  validate->callback([&] { status = do_validate(val); });

  ModelsOpts mod;
  auto* models = app.add_subcommand("models", "sample degree sequences");
  models->add_option("--model", mod.model)->check(CLI::IsMember({"true", "B", "E", "I"}));
  models->add_option("--n", mod.n);
  models->add_option("--m", mod.m, "other side size (bipartite)");
  models->add_option("--p", mod.p);
  models->add_option("--seed", mod.seed);
  models->add_option("--samples", mod.samples);
  models->add_flag("--bipartite", mod.bipartite);
  models->add_flag("--degrees", mod.degrees, "print the full sequences");
  models->callback([&] { status = do_models(mod); });

  EnumerateOpts en;
  auto* enumerate = app.add_subcommand("enumerate", "degree-sequence counts and conditional-degree formulas");
  enumerate->add_option("method", en.method)
      ->required()
      ->check(CLI::IsMember({"count", "mw", "cgm", "ratio", "balanced", "bounded", "expectation", "slice"}));
  enumerate->add_option("--degrees", en.degrees)->delimiter(',');
  enumerate->add_option("--s", en.s)->delimiter(',');
  enumerate->add_option("--t", en.t)->delimiter(',');
  enumerate->add_option("--case", en.which)->check(CLI::IsMember({"graph", "bipartite"}));
  enumerate->add_option("--n", en.n);
  enumerate->add_option("--m", en.m);
  enumerate->add_option("--r", en.r);
  enumerate->add_option("--d", en.d);
  enumerate->add_option("--v-size", en.h, "|V|, default n / 2");
  enumerate->add_option("--p", en.p);
  enumerate->add_option("--alpha", en.alpha);
  enumerate->add_option("--gamma", en.gamma);
  enumerate->add_option("--t-value", en.t_value, "degree of the distinguished vertex into V");
  enumerate->add_option("--betas", en.betas)->delimiter(',');
  enumerate->add_option("--beta-width", en.beta_width, "random betas uniform on [-w, w] when --betas is absent");
  enumerate->add_option("--values", en.values)->delimiter(',');
  enumerate->add_option("--slice", en.slice);
  enumerate->add_option("--mode", en.mode);
  enumerate->add_option("--seed", en.seed);
  enumerate->add_option("--samples", en.samples);
  enumerate->callback([&] { status = do_enumerate(en); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}

#include "fdpenv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fdpenv/bound_constants.hpp"
#include "fdpenv/envelopes.hpp"
#include "fdpenv/error.hpp"
#include "fdpenv/io.hpp"
#include "fdpenv/online_monitor.hpp"
#include "fdpenv/paths.hpp"
#include "fdpenv/session.hpp"
#include "fdpenv/session_service.hpp"
#include "fdpenv/simulation.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fdpenv::cli {

namespace {

using nlohmann::json;

struct Common {
  double alpha = 0.05;
  double a = 1.0;
  bool allow_unproven_alpha = false;
  std::string out;
  std::string meta;
};

struct EnvelopeArgs {
  std::string setting = "sort";
  std::string input;
  std::optional<double> p_star;
  std::optional<double> lambda;
  std::string acc_fn = "seqstep";
  std::string acc_constant = "bounded";
  std::string order_by;
  std::string id_col = "id";
  std::string value_col;
};

struct OnlineArgs {
  std::string mode = "simple";
  std::optional<double> b_cap;
  std::string input = "-";
};

struct SimulateArgs {
  std::string experiment;
  sim::SimConfig config;
  std::string setting = "sort";
  std::optional<double> p_star;
  std::optional<double> lambda;
  std::vector<double> rhos{-0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> q_min_grid{0.01, 0.025, 0.05, 0.1, 0.2};
  std::vector<double> q_set{0.01, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2};
  double x = 1.5;
  std::string summary;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
  std::string data_dir = ".";
  std::string state_dir;
};

struct ConstantArgs {
  std::string family = "sort";
  std::optional<double> b;
  std::optional<double> lambda;
  std::string acc_fn = "seqstep";
};

/// Stream for the primary output: --out file or the caller's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*file_) throw Error(Errc::Io, "cannot write '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void write_meta(const Common& common, const json& meta, std::ostream& err) {
  if (common.meta.empty()) {
    err << meta.dump() << '\n';
    return;
  }
  std::ofstream file(common.meta, std::ios::trunc);
  if (!file) throw Error(Errc::Io, "cannot write '" + common.meta + "'");
  file << meta.dump(2) << '\n';
}

io::InputDataset read_dataset(const std::string& path, io::DatasetKind kind, const io::CsvColumns& cols,
                              std::istream& in) {
  if (path.empty()) throw Error(Errc::ConfigInvalid, "an input file is required");
  if (path == "-") return io::parse_dataset(in, kind, cols, "<stdin>");
  return io::parse_dataset(std::filesystem::path(path), kind, cols);
}

SortOptions sort_options(const Common& common) { return {common.allow_unproven_alpha}; }

AccumulationFn acc_fn_from(const std::string& name, double lambda) {
  if (name == "seqstep") return AccumulationFn::seq_step(lambda);
  if (name == "forwardstop") return AccumulationFn::forward_stop();
  throw Error(Errc::ConfigInvalid, "unknown accumulation function '" + name + "'");
}

std::vector<std::size_t> preorder_from(const io::InputDataset& data, const std::string& column) {
  std::vector<std::size_t> pi = identity_permutation(data.pvalues.size());
  if (column.empty()) return pi;
  std::vector<double> key(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const json& x = data.pvalues[i].x;
    const auto it = x.find(column);
    if (it == x.end() || !it->is_number()) {
      throw Error(Errc::ConfigInvalid, "ordering column '" + column + "' is missing or not numeric for id '" +
                                           data.pvalues[i].id + "'");
    }
    key[i] = it->get<double>();
  }
  std::stable_sort(pi.begin(), pi.end(), [&](std::size_t l, std::size_t r) { return key[l] < key[r]; });
  return pi;
}

EnvelopeCurve knockoff_curve(const io::InputDataset& data, const Common& common) {
  KnockoffStats stats;
  for (const io::KnockoffRow& row : data.knockoffs) {
    stats.ids.push_back(row.id);
    stats.w.push_back(row.w);
  }
  const PathWithVhat built = build_knockoff_path(stats);
  return compute_envelope(built.path, built.vhat, constant_knockoff(common.alpha, common.a));
}

int cmd_envelope(const EnvelopeArgs& args, const Common& common, std::istream& in, std::ostream& out,
                 std::ostream& err) {
  io::CsvColumns cols{args.id_col, args.value_col};
  EnvelopeCurve curve;
  json extra = json::object();
  if (args.setting == "knockoff") {
    curve = knockoff_curve(read_dataset(args.input, io::DatasetKind::KnockoffW, cols, in), common);
  } else {
    const io::InputDataset data = read_dataset(args.input, io::DatasetKind::PValues, cols, in);
    const std::vector<double> p = data.p();
    if (args.setting == "sort") {
      // Resolve the constant first so an unproven alpha fails before any work.
      const BoundConstant c = constant_sort(common.alpha, sort_options(common));
      const PathWithVhat built = build_sorted_path(p);
      curve = compute_envelope(built.path, built.vhat, c);
    } else if (args.setting == "robbins") {
      curve = robbins_envelope(p, common.alpha);
    } else if (args.setting == "dkw") {
      curve = dkw_envelope(p, common.alpha);
    } else if (args.setting == "preorder-acc") {
      const std::vector<std::size_t> pi = preorder_from(data, args.order_by);
      const AccumulationFn h = acc_fn_from(args.acc_fn, args.lambda.value_or(0.5));
      BoundConstant c;
      if (args.acc_constant == "bounded" && h.bound()) {
        c = constant_preorder_acc_bounded(common.alpha, common.a, *h.bound());
      } else if (args.acc_constant == "bounded" || args.acc_constant == "general") {
        c = constant_preorder_acc_general(common.alpha, common.a, h);
      } else {
        throw Error(Errc::ConfigInvalid, "--acc-constant must be bounded or general");
      }
      curve = compute_envelope(build_preordered_path(p, pi, 1.0), vhat_acc(p, pi, h), c);
      extra["acc_fn"] = h.name();
    } else if (args.setting == "preorder-sel") {
      const std::vector<std::size_t> pi = preorder_from(data, args.order_by);
      const double p_star = args.p_star.value_or(0.5);
      const double lambda = args.lambda.value_or(0.5);
      curve = compute_envelope(build_preordered_path(p, pi, p_star), vhat_sel(p, pi, p_star, lambda),
                               constant_sel(common.alpha, common.a, p_star / (1.0 - lambda)));
      extra["p_star"] = p_star;
      extra["lambda"] = lambda;
    } else {
      throw Error(Errc::ConfigInvalid, "unknown setting '" + args.setting + "'");
    }
  }
  Sink sink(common.out, out);
  io::write_envelope_csv(*sink, curve);
  json meta = io::metadata_json(curve.meta);
  meta["setting"] = args.setting;
  meta.update(extra);
  write_meta(common, meta, err);
  return kExitOk;
}

int cmd_knockoff(const EnvelopeArgs& args, const Common& common, std::istream& in, std::ostream& out,
                 std::ostream& err) {
  const EnvelopeCurve curve =
      knockoff_curve(read_dataset(args.input, io::DatasetKind::KnockoffW, {args.id_col, args.value_col}, in), common);
  Sink sink(common.out, out);
  io::write_envelope_csv(*sink, curve);
  json meta = io::metadata_json(curve.meta);
  meta["setting"] = "knockoff";
  write_meta(common, meta, err);
  return kExitOk;
}

int cmd_online(const OnlineArgs& args, const Common& common, std::istream& in, std::ostream& out,
               std::ostream& err) {
  OnlineMode mode;
  if (args.mode == "simple") {
    mode = OnlineMode::Simple;
  } else if (args.mode == "adaptive") {
    mode = OnlineMode::Adaptive;
  } else {
    throw Error(Errc::ConfigInvalid, "--mode must be simple or adaptive");
  }
  OnlineMonitor monitor(mode, common.alpha, common.a, args.b_cap);

  std::ifstream file;
  std::istream* source = &in;
  if (args.input != "-") {
    file.open(args.input);
    if (!file) throw Error(Errc::Io, "cannot open '" + args.input + "'");
    source = &file;
  }
  Sink sink(common.out, out);
  io::write_envelope_header(*sink);
  io::write_envelope_row(*sink, monitor.current());
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::int64_t> last_j;
  while (std::getline(*source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const io::StreamRecord rec = io::parse_stream_record(line, line_no);
    if (last_j && rec.j <= *last_j) throw LineError(Errc::ParseError, line_no, "step index j must increase");
    last_j = rec.j;
    try {
      const LevelTicket ticket = monitor.commit_level(rec.alpha, rec.lambda);
      io::write_envelope_row(*sink, monitor.observe(ticket, rec.p).record);
    } catch (const LineError&) {
      throw;
    } catch (const Error& e) {
      throw LineError(e.code(), line_no, e.what());
    }
    (*sink).flush();
  }
  json meta = {{"family", std::string(to_string(monitor.constant().family))},
               {"alpha", monitor.constant().alpha},
               {"a", monitor.constant().a},
               {"c", monitor.constant().c},
               {"steps", monitor.steps()},
               {"rejections", monitor.rejections()}};
  if (mode == OnlineMode::Adaptive) {
    meta["b_cap"] = *args.b_cap;
    meta["b_seen"] = monitor.b_seen();
  }
  write_meta(common, meta, err);
  return kExitOk;
}

json config_json(const sim::SimConfig& c) {
  return {{"n", c.n},     {"n_nonnull", c.n_nonnull},           {"mu", c.mu},     {"rho", c.rho},
          {"ordering_theta", c.ordering_theta}, {"seed", c.seed}, {"reps", c.reps}};
}

int cmd_simulate(const SimulateArgs& args, const Common& common, std::ostream& out, std::ostream& err) {
  using io::format_double;
  sim::SettingParams params;
  if (args.p_star) params.p_star = *args.p_star;
  if (args.lambda) params.lambda = *args.lambda;
  json summary = {{"experiment", args.experiment},
                  {"config", config_json(args.config)},
                  {"alpha", common.alpha},
                  {"a", common.a}};
  std::ostringstream csv;

  if (args.experiment == "coverage") {
    const sim::Setting setting = sim::parse_setting(args.setting);
    const sim::CoverageResult r = sim::coverage_experiment(setting, args.config, common.alpha, common.a, params);
    csv << "setting,reps,c,violations,violation_rate,max_ratio_quantile\n"
        << args.setting << ',' << r.reps << ',' << format_double(r.constant.c) << ',' << r.violations << ','
        << format_double(r.violation_rate) << ',' << format_double(r.max_ratio_quantile) << '\n';
    summary["setting"] = args.setting;
    summary["results"] = {{"c", r.constant.c},
                          {"violations", r.violations},
                          {"violation_rate", r.violation_rate},
                          {"max_ratio_quantile", r.max_ratio_quantile}};
  } else if (args.experiment == "correlation") {
    const auto cells = sim::correlation_sweep(args.rhos, args.config, common.alpha, common.a);
    csv << "rho,violation_rate,max_ratio_quantile\n";
    json rows = json::array();
    for (const auto& cell : cells) {
      csv << format_double(cell.rho) << ',' << format_double(cell.violation_rate) << ','
          << format_double(cell.max_ratio_quantile) << '\n';
      rows.push_back({{"rho", cell.rho},
                      {"violation_rate", cell.violation_rate},
                      {"max_ratio_quantile", cell.max_ratio_quantile}});
    }
    summary["results"] = rows;
  } else if (args.experiment == "bh-overshoot") {
    const auto r = sim::bh_overshoot_experiment(args.config, args.q_min_grid, args.q_set);
    csv << "range,q_min,mean,q90\n";
    json rows = json::array();
    for (const auto& cell : r.cells) {
      csv << "interval," << format_double(cell.q_min) << ',' << format_double(cell.mean) << ','
          << format_double(cell.q90) << '\n';
      rows.push_back({{"q_min", cell.q_min}, {"mean", cell.mean}, {"q90", cell.q90}});
    }
    csv << "set," << format_double(*std::min_element(args.q_set.begin(), args.q_set.end())) << ','
        << format_double(r.q_set_mean) << ',' << format_double(r.q_set_q90) << '\n';
    summary["results"] = {{"intervals", rows},
                          {"q_set", args.q_set},
                          {"q_set_mean", r.q_set_mean},
                          {"q_set_q90", r.q_set_q90}};
  } else if (args.experiment == "poisson") {
    const auto r = sim::poisson_hitting_check(args.config.n, args.x, args.config.reps, args.config.seed,
                                              args.config.threads);
    csv << "n,x,reps,p_empirical,p_poisson,se,p_bound,holds\n"
        << args.config.n << ',' << format_double(args.x) << ',' << args.config.reps << ','
        << format_double(r.p_empirical) << ',' << format_double(r.p_poisson) << ',' << format_double(r.se) << ','
        << format_double(r.p_bound) << ',' << (r.holds ? "true" : "false") << '\n';
    summary["results"] = {{"p_empirical", r.p_empirical}, {"p_poisson", r.p_poisson}, {"se", r.se},
                          {"p_bound", r.p_bound},         {"holds", r.holds}};
  } else if (args.experiment == "quantile") {
    const sim::Setting setting = sim::parse_setting(args.setting);
    const auto rows = sim::pointwise_fdp_quantile(setting, args.config, common.alpha, common.a, params);
    csv << "k,fdp_quantile,mean_fdp_bar\n";
    for (const auto& row : rows) {
      csv << row.k << ',' << format_double(row.fdp_quantile) << ',' << format_double(row.mean_fdp_bar) << '\n';
    }
    summary["setting"] = args.setting;
    summary["results"] = {{"steps", rows.size()}};
  } else {
    throw Error(Errc::ConfigInvalid, "unknown experiment '" + args.experiment + "'");
  }
  if (args.experiment == "coverage" || args.experiment == "quantile") {
    summary["ordering_pmf"] = "exp(-theta j / n) normalized over j = 1..n";
  }

  Sink sink(common.out, out);
  *sink << csv.str();
  if (args.summary.empty()) {
    err << summary.dump() << '\n';
  } else {
    std::ofstream file(args.summary, std::ios::trunc);
    if (!file) throw Error(Errc::Io, "cannot write '" + args.summary + "'");
    file << summary.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_serve(const ServeArgs& args, std::ostream& err) {
  std::optional<std::filesystem::path> state_dir;
  if (!args.state_dir.empty()) state_dir = args.state_dir;
  SessionStore store(state_dir);
  httplib::Server server;
  SessionApiOptions options;
  if (!args.data_dir.empty()) options.data_dir = args.data_dir;
  mount_session_api(server, store, options);
  if (!args.ui_dir.empty() && !server.set_mount_point("/", args.ui_dir)) {
    throw Error(Errc::Io, "UI directory '" + args.ui_dir + "' does not exist");
  }
  int port = args.port;
  if (port == 0) {
    port = server.bind_to_any_port(args.host);
  } else if (!server.bind_to_port(args.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(Errc::Io, "cannot bind " + args.host + ":" + std::to_string(args.port));
  err << "listening on http://" << args.host << ':' << port << std::endl;
  server.listen_after_bind();
  return kExitOk;
}

int cmd_constant(const ConstantArgs& args, const Common& common, std::ostream& out) {
  BoundConstant c;
  const std::string& f = args.family;
  auto need_b = [&] {
    if (!args.b) throw Error(Errc::ConfigInvalid, "family '" + f + "' needs --b");
    return *args.b;
  };
  if (f == "sort") {
    c = constant_sort(common.alpha, sort_options(common));
  } else if (f == "preorder-acc-general") {
    c = constant_preorder_acc_general(common.alpha, common.a, acc_fn_from(args.acc_fn, args.lambda.value_or(0.5)));
  } else if (f == "preorder-acc-bounded") {
    c = constant_preorder_acc_bounded(common.alpha, common.a, need_b());
  } else if (f == "sel") {
    c = constant_sel(common.alpha, common.a, need_b());
  } else if (f == "knockoff") {
    c = constant_knockoff(common.alpha, common.a);
  } else if (f == "online-simple") {
    c = constant_online_simple(common.alpha, common.a);
  } else if (f == "online-adaptive") {
    c = constant_online_adaptive(common.alpha, common.a, need_b());
  } else {
    throw Error(Errc::ConfigInvalid, "unknown family '" + f + "'");
  }
  Sink sink(common.out, out);
  json doc = to_json(c);
  *sink << doc.dump() << '\n';
  return kExitOk;
}

void add_common(CLI::App& cmd, Common& common, bool with_alpha = true) {
  if (with_alpha) cmd.add_option("--alpha", common.alpha, "Confidence level alpha in (0, 1)")->capture_default_str();
  cmd.add_option("--a", common.a, "Regularization a > 0")->capture_default_str();
  cmd.add_option("--out", common.out, "Write the primary output here instead of stdout");
  cmd.add_option("--meta", common.meta, "Write metadata JSON here instead of stderr");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simultaneous FDP confidence envelopes along rejection paths", "fdpenv"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_flag("--allow-unproven-alpha", common.allow_unproven_alpha,
               "Permit sorted-path alpha above 0.31 (reported with a warning)");

  EnvelopeArgs env;
  CLI::App* envelope = app.add_subcommand("envelope", "Batch envelope for a p-value or knockoff file");
  add_common(*envelope, common);
  envelope->add_option("--setting", env.setting, "sort | preorder-acc | preorder-sel | knockoff | robbins | dkw")
      ->capture_default_str()
      ->check(CLI::IsMember({"sort", "preorder-acc", "preorder-sel", "knockoff", "robbins", "dkw"}));
  envelope->add_option("--pstar", env.p_star, "Inclusion threshold p_* (preorder-sel)");
  envelope->add_option("--lambda", env.lambda, "Estimator threshold lambda (preorder-sel, seqstep)");
  envelope->add_option("--acc-fn", env.acc_fn, "seqstep | forwardstop")
      ->capture_default_str()
      ->check(CLI::IsMember({"seqstep", "forwardstop"}));
  envelope->add_option("--acc-constant", env.acc_constant, "bounded | general")
      ->capture_default_str()
      ->check(CLI::IsMember({"bounded", "general"}));
  envelope->add_option("--order-by", env.order_by, "Numeric column giving the preorder (default: file order)");
  envelope->add_option("--id-col", env.id_col, "Identifier column")->capture_default_str();
  envelope->add_option("--value-col", env.value_col, "p-value or statistic column (default p, or w)");
  envelope->add_option("input", env.input, "Input CSV, or - for stdin")->required();

  EnvelopeArgs ko;
  CLI::App* knockoff = app.add_subcommand("knockoff", "Envelope along a knockoff path from W statistics");
  add_common(*knockoff, common);
  knockoff->add_option("--id-col", ko.id_col, "Identifier column")->capture_default_str();
  knockoff->add_option("--w-col", ko.value_col, "Statistic column (default w)");
  knockoff->add_option("input", ko.input, "Input CSV/TSV, or - for stdin")->required();

  OnlineArgs onl;
  CLI::App* online = app.add_subcommand("online", "Stream an online envelope from JSON Lines");
  add_common(*online, common);
  online->add_option("--mode", onl.mode, "simple | adaptive")
      ->capture_default_str()
      ->check(CLI::IsMember({"simple", "adaptive"}));
  online->add_option("--b-cap", onl.b_cap, "Declared sup of alpha_j / (1 - lambda_j) (adaptive)");
  online->add_option("input", onl.input, "JSONL file, or - for stdin")->capture_default_str();

  SimulateArgs simargs;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo experiments");
  add_common(*simulate, common);
  simulate->add_option("experiment", simargs.experiment, "coverage | correlation | bh-overshoot | poisson | quantile")
      ->required()
      ->check(CLI::IsMember({"coverage", "correlation", "bh-overshoot", "poisson", "quantile"}));
  simulate->add_option("--setting", simargs.setting, "Setting for coverage and quantile")
      ->capture_default_str()
      ->check(CLI::IsMember({"sort", "preorder-acc", "preorder-sel", "knockoff", "online-simple", "online-adaptive"}));
  simulate->add_option("--n", simargs.config.n, "Hypotheses per trial")->capture_default_str();
  simulate->add_option("--n-nonnull", simargs.config.n_nonnull, "Non-null hypotheses")->capture_default_str();
  simulate->add_option("--mu", simargs.config.mu, "Non-null mean shift")->capture_default_str();
  simulate->add_option("--rho", simargs.config.rho, "AR(1) correlation")->capture_default_str();
  simulate->add_option("--theta", simargs.config.ordering_theta, "Exponential tilt of non-null positions")
      ->capture_default_str();
  simulate->add_option("--reps", simargs.config.reps, "Trials")->capture_default_str();
  simulate->add_option("--seed", simargs.config.seed, "Seed")->capture_default_str();
  simulate->add_option("--threads", simargs.config.threads, "Worker threads (0 = all cores)")->capture_default_str();
  simulate->add_option("--pstar", simargs.p_star, "p_* of preorder-sel");
  simulate->add_option("--lambda", simargs.lambda, "lambda of preorder-sel");
  simulate->add_option("--rhos", simargs.rhos, "Correlations for the sweep")->delimiter(',');
  simulate->add_option("--qmin-grid", simargs.q_min_grid, "Lower ends of [q_min, 1]")->delimiter(',');
  simulate->add_option("--q-set", simargs.q_set, "Finite level set")->delimiter(',');
  simulate->add_option("--x", simargs.x, "Boundary slope x for the Poisson check")->capture_default_str();
  simulate->add_option("--summary", simargs.summary, "Write the JSON summary here instead of stderr");

  ServeArgs srv;
  CLI::App* serve = app.add_subcommand("serve", "HTTP API for interactive sessions");
  serve->add_option("--host", srv.host)->capture_default_str();
  serve->add_option("--port", srv.port, "0 picks a free port")->capture_default_str();
  serve->add_option("--ui-dir", srv.ui_dir, "Static UI bundle served at /");
  serve->add_option("--data-dir", srv.data_dir, "Root for dataset references")->capture_default_str();
  serve->add_option("--state-dir", srv.state_dir, "Persist sessions here");

  ConstantArgs cst;
  CLI::App* constant = app.add_subcommand("constant", "Print the envelope constant c(alpha) as JSON");
  add_common(*constant, common);
  constant->add_option("--family", cst.family,
                       "sort | preorder-acc-general | preorder-acc-bounded | sel | knockoff | online-simple | "
                       "online-adaptive")
      ->capture_default_str()
      ->check(CLI::IsMember({"sort", "preorder-acc-general", "preorder-acc-bounded", "sel", "knockoff",
                             "online-simple", "online-adaptive"}));
  constant->add_option("--b", cst.b, "Bound B");
  constant->add_option("--lambda", cst.lambda, "SeqStep threshold for preorder-acc-general");
  constant->add_option("--acc-fn", cst.acc_fn, "seqstep | forwardstop")
      ->capture_default_str()
      ->check(CLI::IsMember({"seqstep", "forwardstop"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*envelope) return cmd_envelope(env, common, in, out, err);
    if (*knockoff) return cmd_knockoff(ko, common, in, out, err);
    if (*online) return cmd_online(onl, common, in, out, err);
    if (*simulate) return cmd_simulate(simargs, common, out, err);
    if (*serve) return cmd_serve(srv, err);
    if (*constant) return cmd_constant(cst, common, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace fdpenv::cli

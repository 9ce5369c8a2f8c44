// Command-line driver for the detour detection pipeline.

#include "detour/config.hpp"
#include "detour/error.hpp"
#include "detour/io.hpp"
#include "detour/map_matching.hpp"
#include "detour/offline_classifier.hpp"
#include "detour/online_detector.hpp"
#include "detour/pricing.hpp"
#include "detour/report.hpp"
#include "detour/road_network.hpp"
#include "detour/simulator.hpp"
#include "detour/trip.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace detour;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  std::string network;
  std::string trips;
  std::string model;
  std::string schedule;
  std::string city;
  std::string events = "-";
  std::string output;

  std::optional<int> rows;
  std::optional<int> cols;
  std::optional<std::size_t> n_trips;
  std::optional<std::size_t> n_drivers;
  std::string mix;
  std::optional<double> inflation;
  std::optional<double> noise;
  std::optional<double> period;
  bool match = false;
  bool all = false;
  bool no_svg = false;
  std::optional<double> u0;
  std::optional<double> ridge;
  std::optional<double> train_fraction;
};

struct Context {
  RunConfig cfg;
  fs::path out;

  // Explicit flags are taken relative to the working directory, config
  // paths relative to the output directory.
  fs::path input(const std::string& flag, const std::string& configured) const {
    if (!flag.empty()) return flag;
    const fs::path p(configured);
    return p.is_absolute() ? p : out / p;
  }
};

BehaviorMix parse_mix(const std::string& text) {
  BehaviorMix mix{0.0, 0.0, 0.0, 0.0};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "mix entries look like name=p");
    const auto behavior = parse_behavior(item.substr(0, eq));
    double p = 0.0;
    try {
      p = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "bad probability in mix entry '" + item + "'");
    }
    switch (behavior) {
      case Behavior::normal: mix.normal = p; break;
      case Behavior::detour: mix.detour = p; break;
      case Behavior::avoid_congestion: mix.avoid_congestion = p; break;
      case Behavior::shortcut: mix.shortcut = p; break;
    }
  }
  mix.validate();
  return mix;
}

Context make_context(const Options& o) {
  Context ctx;
  if (!o.config_path.empty()) ctx.cfg = load_run_config(o.config_path);
  auto& c = ctx.cfg;
  if (o.seed) c.sim.seed = *o.seed;
  if (!o.out_dir.empty()) c.paths.out_dir = o.out_dir;
  if (!o.city.empty()) c.city = o.city;
  if (o.rows) c.sim.rows = *o.rows;
  if (o.cols) c.sim.cols = *o.cols;
  if (o.n_trips) c.sim.n_trips = *o.n_trips;
  if (o.n_drivers) c.sim.n_drivers = *o.n_drivers;
  if (!o.mix.empty()) c.sim.behavior_mix = parse_mix(o.mix);
  if (o.inflation) c.sim.detour_inflation = *o.inflation;
  if (o.noise) c.sim.gps_noise_m = *o.noise;
  if (o.period) c.sim.gps_period_s = *o.period;
  if (o.match) c.rematch = true;
  if (o.ridge) c.train.ridge = *o.ridge;
  if (o.train_fraction) c.train_fraction = *o.train_fraction;
  c.sim.weights = c.routing;
  c.validate();
  ctx.out = c.paths.out_dir;
  return ctx;
}

FareSchedule schedule_for(const Context& ctx, const Options& o) {
  if (!o.schedule.empty()) return load_schedule(o.schedule);
  if (!ctx.cfg.paths.schedule.empty()) return load_schedule(ctx.input("", ctx.cfg.paths.schedule));
  return preset_schedule(ctx.cfg.city);
}

std::vector<TripRecord> split_side(const std::vector<TripRecord>& trips, const RunConfig& cfg,
                                   bool training) {
  std::vector<TripRecord> out;
  for (std::size_t i = 0; i < trips.size(); ++i) {
    if (in_training_split(cfg.sim.seed, i, cfg.train_fraction) == training) out.push_back(trips[i]);
  }
  return out;
}

void say(const std::string& line) { std::cout << line << "\n"; }

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << x;
  return os.str();
}

// ---- commands ----

void cmd_gen_network(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = generate_network(ctx.cfg.sim);
  const auto path = o.output.empty() ? ctx.input("", ctx.cfg.paths.network) : fs::path(o.output);
  save_network(net, path);
  say("network=" + path.string() + " nodes=" + std::to_string(net.node_count()) +
      " segments=" + std::to_string(net.segment_count()));
}

void cmd_gen_trips(const Options& o) {
  const auto ctx = make_context(o);
  const auto net_path = ctx.input(o.network, ctx.cfg.paths.network);
  const auto net = load_network(net_path);
  auto trips = generate_trips(net, ctx.cfg.sim);
  if (ctx.cfg.rematch) rematch_trips(net, trips, ctx.cfg.match, ctx.cfg.routing);
  for (auto& t : trips) t.record.network = net_path.filename().string();
  const auto trips_path = o.output.empty() ? ctx.input("", ctx.cfg.paths.trips) : fs::path(o.output);
  save_simulated_trips(trips, trips_path);
  const auto records = records_of(trips);
  const auto drivers = derive_drivers(schedule_for(ctx, o), net, records);
  const auto drivers_path = trips_path.parent_path() / "drivers.jsonl";
  save_drivers(drivers, drivers_path);
  std::size_t detours = 0;
  for (const auto& t : records) detours += t.label == TripLabel::detour ? 1 : 0;
  say("trips=" + trips_path.string() + " count=" + std::to_string(records.size()) +
      " detours=" + std::to_string(detours) + " drivers=" + std::to_string(drivers.size()));
}

void cmd_filter(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto trips = load_trips(ctx.input(o.trips, ctx.cfg.paths.trips));
  const auto result = filter_dataset(net, trips, ctx.cfg.filter);
  const auto kept_path = o.output.empty() ? ctx.out / "filtered.jsonl" : fs::path(o.output);
  save_trips(result.kept, kept_path);
  save_rejections(result.rejected, kept_path.parent_path() / "rejected.jsonl");
  std::map<std::string, std::size_t> reasons;
  for (const auto& r : result.rejected) ++reasons[std::string(to_string(r.reason))];
  std::string line = "kept=" + std::to_string(result.kept.size()) +
                     " rejected=" + std::to_string(result.rejected.size());
  for (const auto& [reason, n] : reasons) line += " " + reason + "=" + std::to_string(n);
  say(line);
}

void cmd_train(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto trips_path = ctx.input(o.trips, ctx.cfg.paths.trips);
  const auto trips = load_trips(trips_path);
  const auto side = o.all ? trips : split_side(trips, ctx.cfg, true);
  const auto data = labeled_features(net, side);
  auto report = train(data, ctx.cfg.train);
  report.model.trained_on = trips_path.filename().string() +
                            (o.all ? std::string(" (all)")
                                   : " (split " + fixed(ctx.cfg.train_fraction, 2) + ", seed " +
                                         std::to_string(ctx.cfg.sim.seed) + ")");
  const auto model_path = o.output.empty() ? ctx.input("", ctx.cfg.paths.model) : fs::path(o.output);
  save_model(report.model, model_path);
  write_text_file(model_path.parent_path() / "train_report.json", train_report_to_json(report));
  say("model=" + model_path.string() + " n=" + std::to_string(data.size()) +
      " beta0=" + fixed(report.model.beta0) + " beta1=" + fixed(report.model.beta1) +
      " beta2=" + fixed(report.model.beta2) + " converged=" + (report.converged ? "true" : "false") +
      " iterations=" + std::to_string(report.iterations));
  if (!report.diagnostic.empty()) say("diagnostic: " + report.diagnostic);
}

void cmd_eval(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto trips = load_trips(ctx.input(o.trips, ctx.cfg.paths.trips));
  const auto model = load_model(ctx.input(o.model, ctx.cfg.paths.model));
  const auto side = o.all ? trips : split_side(trips, ctx.cfg, false);
  const auto data = labeled_features(net, side);
  const auto result = evaluate_roc_auc(model, data);
  const auto roc_path = o.output.empty() ? ctx.out / "roc.csv" : fs::path(o.output);
  write_text_file(roc_path, roc_csv(result));
  say("auc=" + fixed(result.auc) + " n=" + std::to_string(data.size()));
}

void cmd_detect(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto model = load_model(ctx.input(o.model, ctx.cfg.paths.model));
  const OnlineDetector detector(net, model, ctx.cfg.routing);

  std::string text;
  if (o.events == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    text = read_text_file(o.events);
  }
  std::ofstream file;
  if (!o.output.empty()) {
    if (fs::path(o.output).has_parent_path()) fs::create_directories(fs::path(o.output).parent_path());
    file.open(o.output, std::ios::binary);
    if (!file) throw Error(ErrorKind::missing_input, "cannot open " + o.output);
  }
  std::ostream& out = o.output.empty() ? std::cout : file;

  std::map<std::string, TripProgress> live;
  std::string decisions;
  for_each_jsonl_line(text, o.events == "-" ? "stdin" : o.events, [&](std::string_view line) {
    const auto j = nlohmann::json::parse(line);
    const auto trip_id = j.at("trip_id").get<std::string>();
    const AtrStep step{SegmentId{j.at("segment").get<std::int64_t>()}, j.at("t").get<double>()};
    auto it = live.find(trip_id);
    if (it == live.end()) {
      if (!j.contains("dest")) {
        throw Error(ErrorKind::input, "first event of trip " + trip_id + " must carry dest");
      }
      it = live.emplace(trip_id,
                        detector.begin(trip_id, SegmentId{j.at("dest").get<std::int64_t>()}))
               .first;
    }
    const auto d = detector.step(it->second, step);
    nlohmann::ordered_json rec = {{"trip_id", trip_id},
                                  {"step", d.step},
                                  {"theta", d.theta},
                                  {"action", std::string(to_string(d.action))},
                                  {"scenario", std::string(to_string(d.scenario))}};
    out << rec.dump() << "\n";
  });
  out.flush();
}

void cmd_stage_report(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto trips = load_trips(ctx.input(o.trips, ctx.cfg.paths.trips));
  const auto model = load_model(ctx.input(o.model, ctx.cfg.paths.model));
  const auto side = o.all ? trips : split_side(trips, ctx.cfg, false);
  const auto report = stage_auc(net, side, model);
  const auto path = o.output.empty() ? ctx.out / "stage_auc.csv" : fs::path(o.output);
  write_text_file(path, stage_report_csv(report));
  say("stage_auc=" + path.string() + " stage1=" + fixed(report.auc[0]) +
      " stage10=" + fixed(report.auc[9]));
}

PricingReport run_pricing(const Context& ctx, const Options& o, const RoadNetwork& net,
                          const std::vector<TripRecord>& trips) {
  return pricing_report(schedule_for(ctx, o), net, trips, o.u0);
}

void cmd_pricing(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto trips = load_trips(ctx.input(o.trips, ctx.cfg.paths.trips));
  const auto report = run_pricing(ctx, o, net, trips);
  const auto path = o.output.empty() ? ctx.out / "intervals.csv" : fs::path(o.output);
  write_text_file(path, interval_report_csv(report));
  save_schedule(report.schedule, path.parent_path() / "schedule_with_alpha4.json");
  std::string line = "intervals=" + path.string() + " u0=" + fixed(report.u0);
  if (report.fit) line += " coefficient=" + fixed(report.fit->coefficient) + " r2=" + fixed(report.fit->r2);
  say(line);
}

void cmd_report(const Options& o) {
  const auto ctx = make_context(o);
  const auto net = load_network(ctx.input(o.network, ctx.cfg.paths.network));
  const auto trips = load_trips(ctx.input(o.trips, ctx.cfg.paths.trips));
  const auto model = load_model(ctx.input(o.model, ctx.cfg.paths.model));
  const auto side = o.all ? trips : split_side(trips, ctx.cfg, false);
  const fs::path dir = o.output.empty() ? ctx.out : fs::path(o.output);

  const auto roc = evaluate_roc_auc(model, labeled_features(net, side));
  write_text_file(dir / "roc.csv", roc_csv(roc));
  const auto stages = stage_auc(net, side, model);
  write_text_file(dir / "stage_auc.csv", stage_report_csv(stages));
  const auto pricing = run_pricing(ctx, o, net, trips);
  write_text_file(dir / "intervals.csv", interval_report_csv(pricing));

  if (!o.no_svg) {
    ChartSeries roc_series{"ROC", {}};
    for (const auto& p : roc.roc) roc_series.points.emplace_back(p.fpr, p.tpr);
    write_text_file(dir / "roc.svg", svg_line_chart("ROC (AUC " + fixed(roc.auc, 4) + ")",
                                                    "false positive rate", "true positive rate",
                                                    {roc_series}));
    ChartSeries auc_series{"AUC", {}};
    for (std::size_t k = 0; k < 10; ++k) auc_series.points.emplace_back(k + 1.0, stages.auc[k]);
    write_text_file(dir / "stage_auc.svg",
                    svg_line_chart("AUC by trip completeness", "stage", "AUC", {auc_series}));

    ChartSeries ratio{"detour ratio", {}};
    ChartSeries utility{"U", {}};
    ChartSeries alpha4{"alpha4", {}};
    ChartSeries df0{"delta f0", {}};
    ChartSeries da1{"delta alpha1", {}};
    for (const auto& row : pricing.rows) {
      const double mid = (row.params.start_min + row.params.end_min) / 120.0;
      ratio.points.emplace_back(mid, row.detour_ratio);
      if (row.utility) {
        utility.points.emplace_back(mid, *row.utility);
        alpha4.points.emplace_back(mid, *row.alpha4);
      }
      if (row.adjustment.solvable) {
        df0.points.emplace_back(mid, row.adjustment.delta_f0);
        da1.points.emplace_back(mid, row.adjustment.delta_alpha1);
      }
    }
    write_text_file(dir / "detour_ratio.svg",
                    svg_line_chart("Detour ratio per interval", "hour of day", "ratio", {ratio}));
    write_text_file(dir / "utility.svg", svg_line_chart("Detour utility and opportunity cost",
                                                        "hour of day", "money per minute",
                                                        {utility, alpha4}));
    write_text_file(dir / "adjustment.svg", svg_line_chart("Price adjustment", "hour of day",
                                                           "money", {df0, da1}));
  }
  say("report=" + dir.string() + " auc=" + fixed(roc.auc) + " stage10=" + fixed(stages.auc[9]));
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_input: return 2;
    case ErrorKind::invariant: return 4;
    default: return 3;
  }
}

void print_error(std::string_view kind, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "error kind=" << kind << " message=\"" << flat << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taxi detour detection pipeline"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "run configuration JSON");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--out", o.out_dir, "output directory");

  auto* gen_net = app.add_subcommand("gen-network", "generate a synthetic grid network");
  gen_net->add_option("--rows", o.rows);
  gen_net->add_option("--cols", o.cols);

  auto* gen_trips = app.add_subcommand("gen-trips", "simulate labeled trips");
  gen_trips->add_option("--n-trips", o.n_trips);
  gen_trips->add_option("--drivers", o.n_drivers);
  gen_trips->add_option("--mix", o.mix, "e.g. normal=0.9,detour=0.1");
  gen_trips->add_option("--inflation", o.inflation, "planted extra-distance fraction");
  gen_trips->add_option("--noise", o.noise, "GPS noise sigma in meters");
  gen_trips->add_option("--period", o.period, "GPS sampling period in seconds");
  gen_trips->add_flag("--match", o.match, "rebuild trajectories from GPS by map matching");

  auto* filter = app.add_subcommand("filter", "screen trips by the data-cleaning rules");
  auto* train_cmd = app.add_subcommand("train", "fit the logistic model");
  train_cmd->add_option("--ridge", o.ridge);
  auto* eval = app.add_subcommand("eval", "offline ROC/AUC");
  auto* detect = app.add_subcommand("detect", "stream events through the online detector");
  detect->add_option("--events", o.events, "JSONL events file, '-' for stdin");
  auto* stage = app.add_subcommand("stage-report", "AUC by trip completeness");
  auto* pricing = app.add_subcommand("pricing", "interval pricing analysis");
  pricing->add_option("--u0", o.u0, "target utility instead of the fitted one");
  auto* report = app.add_subcommand("report", "all CSV reports plus SVG charts");
  report->add_option("--u0", o.u0);
  report->add_flag("--no-svg", o.no_svg);

  for (auto* sub : {gen_net, gen_trips, filter, train_cmd, eval, detect, stage, pricing, report}) {
    sub->add_option("--config", o.config_path, "run configuration JSON");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--output", o.output, "output file (directory for report)");
  }
  for (auto* sub : {gen_trips, filter, train_cmd, eval, detect, stage, pricing, report}) {
    sub->add_option("--network", o.network);
  }
  for (auto* sub : {filter, train_cmd, eval, stage, pricing, report}) {
    sub->add_option("--trips", o.trips);
  }
  for (auto* sub : {eval, detect, stage, report}) sub->add_option("--model", o.model);
  for (auto* sub : {gen_trips, pricing, report}) {
    sub->add_option("--schedule", o.schedule, "fare schedule JSON");
    sub->add_option("--city", o.city, "built-in schedule preset");
  }
  for (auto* sub : {train_cmd, eval, stage, report}) {
    sub->add_flag("--all", o.all, "use every trip instead of the train/eval split");
    sub->add_option("--train-fraction", o.train_fraction);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 3;
  }

  try {
    if (*gen_net) cmd_gen_network(o);
    else if (*gen_trips) cmd_gen_trips(o);
    else if (*filter) cmd_filter(o);
    else if (*train_cmd) cmd_train(o);
    else if (*eval) cmd_eval(o);
    else if (*detect) cmd_detect(o);
    else if (*stage) cmd_stage_report(o);
    else if (*pricing) cmd_pricing(o);
    else if (*report) cmd_report(o);
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    print_error("parse", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 4;
  }
  return 0;
}

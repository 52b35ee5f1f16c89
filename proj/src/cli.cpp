#include "viscon/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <iostream>
#include <optional>

#include "json.hpp"
#include "viscon/analysis.hpp"
#include "viscon/dataset_kit.hpp"
#include "viscon/farm/coordinator.hpp"
#include "viscon/farm/local.hpp"
#include "viscon/farm/stats.hpp"
#include "viscon/farm/worker.hpp"
#include "viscon/kernels.hpp"
#include "viscon/plan_synth.hpp"

namespace viscon {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<FieldKind> parse_analyses(const std::string& text) {
  std::vector<FieldKind> kinds;
  for (const auto& name : split_list(text)) {
    const FieldKind k = parse_field_kind(name);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  return kinds;
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0, b = 0;
    const int w = std::stoi(text.substr(0, x), &a);
    const int h = std::stoi(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("--size expects WIDTHxHEIGHT, got '" + text + "'");
  }
}

IntRange parse_range(const std::string& text, const char* flag) {
  const auto parts = split_list(text.find('-') != std::string::npos ? std::string(text).replace(text.find('-'), 1, ",")
                                                                     : text);
  try {
    if (parts.size() == 1) {
      const int v = std::stoi(parts[0]);
      return {v, v};
    }
    if (parts.size() == 2) return {std::stoi(parts[0]), std::stoi(parts[1])};
  } catch (const std::logic_error&) {
  }
  throw UsageError(std::string(flag) + " expects N or MIN-MAX, got '" + text + "'");
}

void print_stats(std::ostream& out, const farm::FarmStats& stats, bool json, std::string_view label) {
  if (json)
    out << farm::stats_to_json(stats).dump() << '\n';
  else
    out << farm::format_stats_table(stats, label);
}

std::size_t count_status(const farm::TaskManifest& m, farm::TaskStatus s) {
  return static_cast<std::size_t>(
      std::count_if(m.tasks.begin(), m.tasks.end(), [&](const farm::Task& t) { return t.status == s; }));
}

void apply_isa(const std::string& isa) {
  std::optional<kernels::Isa> parsed;
  try {
    parsed = kernels::parse_isa(isa);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (parsed && !kernels::isa_available(*parsed)) throw UsageError("instruction set '" + isa + "' is not available");
  kernels::select_isa(parsed);
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && args.front() == "plan-synth") args.erase(args.begin());

  CLI::App app{"Occupancy-plan analysis toolkit: synthesis, connectivity fields, batch farm, datasets", "viscon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "viscon 0.1.0");

  // generate
  auto* gen = app.add_subcommand("generate", "Synthesise a batch of plans and a task manifest");
  PlanSynthParams sp;
  std::size_t count = 1;
  std::string style = "corridors", size = "100x100", rooms = "4-8", corridor = "2-3", gen_analyses = "spatial,visual";
  fs::path gen_out;
  double gen_cell = 1.0;
  unsigned gen_threads = 0;
  gen->add_option("--count", count, "Number of plans")->check(CLI::NonNegativeNumber);
  gen->add_option("--style", style, "corridors | open")->capture_default_str();
  gen->add_option("--seed", sp.seed, "Base seed; plan i uses seed + i")->capture_default_str();
  gen->add_option("--size", size, "WIDTHxHEIGHT in cells")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--rooms", rooms, "Room count, N or MIN-MAX")->capture_default_str();
  gen->add_option("--corridor-width", corridor, "Corridor width, N or MIN-MAX")->capture_default_str();
  gen->add_option("--furniture", sp.furniture_density, "Furniture density in [0, 0.4]")->capture_default_str();
  gen->add_option("--door-width", sp.door_width, "Door width in cells")->capture_default_str();
  gen->add_option("--wall-thickness", sp.wall_thickness, "Wall thickness in cells")->capture_default_str();
  gen->add_option("--retries", sp.retry_budget, "Attempts per plan before giving up")->capture_default_str();
  gen->add_option("--analyses", gen_analyses, "Analyses to list in the manifest")->capture_default_str();
  gen->add_option("--cell-size", gen_cell, "Metres per cell recorded in the manifest")->capture_default_str();
  gen->add_option("--threads", gen_threads, "Generator threads (0 = all cores)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Prune a plan and compute one analysis field");
  fs::path ana_in, ana_out;
  std::string ana_kind, visibility = "shadowcast", isa = "auto";
  bool ana_f32 = false;
  double ana_cell = 1.0;
  unsigned ana_threads = 0;
  ana->add_option("--input", ana_in, "Plan PGM")->required();
  ana->add_option("--analysis", ana_kind, "spatial | visual | depth | sdf")->required();
  ana->add_option("--out", ana_out, "Output PGM (or .f32 for raw values)")->required();
  ana->add_flag("--f32", ana_f32, "Also write raw values next to the PGM");
  ana->add_option("--cell-size", ana_cell, "Metres per cell")->capture_default_str();
  ana->add_option("--visibility", visibility, "shadowcast | exact")->capture_default_str();
  ana->add_option("--threads", ana_threads, "Threads (0 = all cores)");
  ana->add_option("--isa", isa, "auto | scalar | avx2")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "Time one analysis on one plan, JSON on stdout");
  fs::path bench_in;
  std::string bench_kind, bench_vis = "shadowcast", bench_isa = "auto";
  int repeat = 3;
  double bench_cell = 1.0;
  unsigned bench_threads = 0;
  bench->add_option("--input", bench_in, "Plan PGM")->required();
  bench->add_option("--analysis", bench_kind, "spatial | visual | depth | sdf")->required();
  bench->add_option("--repeat", repeat, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--cell-size", bench_cell, "Metres per cell")->capture_default_str();
  bench->add_option("--visibility", bench_vis, "shadowcast | exact")->capture_default_str();
  bench->add_option("--threads", bench_threads, "Threads (0 = all cores)");
  bench->add_option("--isa", bench_isa, "auto | scalar | avx2")->capture_default_str();

  // farm
  auto* farm_cmd = app.add_subcommand("farm", "Run a task manifest");
  farm_cmd->require_subcommand(1);
  auto* local = farm_cmd->add_subcommand("local", "Run tasks on a local thread pool");
  fs::path local_manifest;
  unsigned local_workers = 1;
  bool local_json = false;
  local->add_option("--manifest", local_manifest, "Task manifest (JSON Lines)")->required();
  local->add_option("--workers", local_workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  local->add_flag("--json", local_json, "Print stats as JSON");

  auto* serve = farm_cmd->add_subcommand("serve", "Coordinate TCP workers");
  fs::path serve_manifest;
  std::string bind = "127.0.0.1:0";
  double hb_timeout = 10.0;
  bool serve_json = false;
  serve->add_option("--manifest", serve_manifest, "Task manifest (JSON Lines)")->required();
  serve->add_option("--bind", bind, "HOST:PORT to listen on")->capture_default_str();
  serve->add_option("--heartbeat-timeout", hb_timeout, "Seconds before a silent worker is dropped")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_flag("--json", serve_json, "Print stats as JSON");

  auto* worker = farm_cmd->add_subcommand("worker", "Execute tasks for a coordinator");
  std::string connect;
  farm::WorkerOptions wopts;
  double hb_interval = 2.0;
  std::size_t crash_after = 0, stall_after = 0;
  worker->add_option("--connect", connect, "Coordinator HOST:PORT")->required();
  worker->add_option("--slots", wopts.slots, "Concurrent tasks")->check(CLI::PositiveNumber)->capture_default_str();
  worker->add_option("--id", wopts.worker_id, "Worker id (default host-pid)");
  worker->add_option("--heartbeat", hb_interval, "Heartbeat interval in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  worker->add_option("--retries", wopts.connect_retries, "Reconnect attempts")->capture_default_str();
  worker->add_option("--crash-after", crash_after, "Fault injection: drop the connection after N tasks");
  worker->add_option("--stall-after", stall_after, "Fault injection: go silent after N tasks");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Build training datasets");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Pair plans with remapped analysis fields and split them");
  BuildOptions bopts;
  std::string ds_analyses = "spatial,visual", ds_split = "0.7,0.2,0.1", ds_vis = "shadowcast";
  bool no_farm = false;
  build->add_option("--plans", bopts.plans_dir, "Directory of plan PGMs")->required();
  build->add_option("--analyses", ds_analyses, "Comma-separated analyses")->capture_default_str();
  build->add_option("--split", ds_split, "TRAIN,VAL,TEST ratios")->capture_default_str();
  build->add_option("--seed", bopts.split.seed, "Split seed")->capture_default_str();
  build->add_option("--out", bopts.out_dir, "Output directory")->required();
  build->add_option("--workers", bopts.workers, "Farm workers for missing fields (0 = all cores)");
  build->add_flag("--no-farm", no_farm, "Fail instead of computing missing fields");
  build->add_option("--cell-size", bopts.cell_size, "Metres per cell for computed fields")->capture_default_str();
  build->add_option("--visibility", ds_vis, "shadowcast | exact")->capture_default_str();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* failed = &app;
    for (const CLI::App* sub = &app; sub != nullptr;) {
      failed = sub;
      const auto subs = sub->get_subcommands();
      sub = subs.empty() ? nullptr : subs.front();
    }
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (*gen) {
      sp.style = parse_plan_style(style);
      std::tie(sp.width, sp.height) = parse_size(size);
      sp.room_count = parse_range(rooms, "--rooms");
      sp.corridor_width = parse_range(corridor, "--corridor-width");
      BatchOptions bo;
      bo.analyses = parse_analyses(gen_analyses);
      bo.cell_size = gen_cell;
      bo.threads = gen_threads;
      const auto manifest = generate_batch(sp, count, gen_out, bo);
      const std::size_t failed = count_status(manifest, farm::TaskStatus::Failed) / std::max<std::size_t>(1, bo.analyses.size());
      out << "generated " << count - failed << " of " << count << " plans in " << gen_out.string() << '\n';
      for (const auto& t : manifest.tasks)
        if (t.status == farm::TaskStatus::Failed) err << t.input_path << ": " << t.message << '\n';
      return failed == 0 ? kExitOk : kExitFailure;
    }

    if (*ana) {
      apply_isa(isa);
      AnalysisOptions ao{parse_visibility_backend(visibility), ana_threads};
      const auto plan = load_occupancy(ana_in, ana_cell);
      const auto result = analyze_plan(plan, parse_field_kind(ana_kind), ao);
      write_field_output(result.field, result.pruned, ana_out);
      if (ana_f32 && ana_out.extension() != ".f32") {
        fs::path raw = ana_out;
        raw.replace_extension(".f32");
        save_field_f32(result.field, raw);
      }
      return kExitOk;
    }

    if (*bench) {
      apply_isa(bench_isa);
      AnalysisOptions ao{parse_visibility_backend(bench_vis), bench_threads};
      const FieldKind kind = parse_field_kind(bench_kind);
      const auto plan = load_occupancy(bench_in, bench_cell);
      nlohmann::ordered_json j;
      j["input"] = bench_in.string();
      j["analysis"] = std::string(field_kind_name(kind));
      j["width"] = plan.width();
      j["height"] = plan.height();
      j["isa"] = std::string(kernels::active().name);
      std::vector<double> timings;
      for (int i = 0; i < repeat; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = analyze_plan(plan, kind, ao);
        timings.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      double sum = 0.0;
      for (double t : timings) sum += t;
      j["repeat"] = repeat;
      j["timings"] = timings;
      j["mean"] = sum / static_cast<double>(timings.size());
      out << j.dump() << '\n';
      return kExitOk;
    }

    if (*local) {
      auto manifest = farm::TaskManifest::load(local_manifest);
      farm::LocalOptions lo{local_workers, local_manifest};
      const auto stats = farm::run_local(manifest, lo);
      manifest.save(local_manifest);
      print_stats(out, stats, local_json, local_manifest.filename().string());
      const std::size_t failed = count_status(manifest, farm::TaskStatus::Failed);
      if (failed > 0) err << failed << " task(s) failed\n";
      return failed == 0 ? kExitOk : kExitFailure;
    }

    if (*serve) {
      auto manifest = farm::TaskManifest::load(serve_manifest);
      farm::CoordinatorOptions co;
      co.bind = farm::parse_host_port(bind);
      co.heartbeat_timeout = std::chrono::milliseconds(static_cast<long long>(hb_timeout * 1000.0));
      co.persist_path = serve_manifest;
      farm::Coordinator coordinator(manifest, co);
      coordinator.start();
      err << "listening on " << co.bind.host << ':' << coordinator.port() << std::endl;
      const auto stats = coordinator.wait();
      manifest.save(serve_manifest);
      print_stats(out, stats, serve_json, serve_manifest.filename().string());
      const std::size_t failed = count_status(manifest, farm::TaskStatus::Failed);
      if (failed > 0) err << failed << " task(s) failed\n";
      return failed == 0 ? kExitOk : kExitFailure;
    }

    if (*worker) {
      wopts.coordinator = farm::parse_host_port(connect);
      wopts.heartbeat_interval = std::chrono::milliseconds(static_cast<long long>(hb_interval * 1000.0));
      if (crash_after > 0) wopts.crash_after_tasks = crash_after;
      if (stall_after > 0) wopts.stall_after_tasks = stall_after;
      return farm::run_worker(wopts);
    }

    if (*build) {
      bopts.analyses = parse_analyses(ds_analyses);
      const auto ratios = split_list(ds_split);
      if (ratios.size() != 3) throw UsageError("--split expects three comma-separated ratios");
      try {
        for (std::size_t i = 0; i < 3; ++i) bopts.split.ratios[i] = std::stod(ratios[i]);
      } catch (const std::logic_error&) {
        throw UsageError("--split expects three comma-separated ratios, got '" + ds_split + "'");
      }
      bopts.run_farm = !no_farm;
      bopts.visibility = parse_visibility_backend(ds_vis);
      const auto entries = build_dataset(bopts);
      out << "wrote " << entries.size() << " pairs to " << bopts.out_dir.string() << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::InvalidParams ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace viscon

#include "modattach/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "modattach/catalog.hpp"
#include "modattach/error.hpp"
#include "modattach/generator.hpp"
#include "modattach/hardware.hpp"
#include "modattach/loader.hpp"
#include "modattach/metrics.hpp"
#include "modattach/registry.hpp"
#include "text_util.hpp"

namespace modattach {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content)) throw Error(ErrorCode::IoError, "cannot write " + path);
}

ModuleCatalog load_catalog(const std::string& path) {
  try {
    return parse_catalog(read_file(path));
  } catch (const CycleError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

HardwareInventory load_inventory(const std::optional<std::string>& path) {
  if (!path) return {};
  return parse_inventory(read_file(*path));
}

bool prompt(const ModuleRecord& rec, std::istream& in, std::ostream& err) {
  std::string answer;
  for (;;) {
    err << "load " << rec.name << "? [y/n] " << std::flush;
    if (!std::getline(in, answer)) return false;
    const auto a = detail::trim(answer);
    if (a == "y" || a == "Y" || a == "yes") return true;
    if (a == "n" || a == "N" || a == "no") return false;
  }
}

struct PolicyFlags {
  std::string policy = "all-load";
  bool interactive = false;
  bool assume_yes = false;
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& p) {
  cmd->add_option("--policy", p.policy, "all-load | all-skip | file:<path> | interactive");
  cmd->add_flag("--interactive", p.interactive, "Ask load/skip for every module (stdin)");
  cmd->add_flag("--assume-yes", p.assume_yes, "Alias for --policy all-load");
}

SelectionPolicy make_policy(const PolicyFlags& p, std::istream& in, std::ostream& err) {
  if (p.interactive && p.assume_yes) {
    throw Error(ErrorCode::UsageError, "--interactive and --assume-yes are exclusive");
  }
  auto ask = [&in, &err](const ModuleRecord& rec) { return prompt(rec, in, err); };
  if (p.interactive) return SelectionPolicy::interactive(ask);
  if (p.assume_yes || p.policy == "all-load") return SelectionPolicy::all_load();
  if (p.policy == "all-skip") return SelectionPolicy::all_skip();
  if (p.policy == "interactive") return SelectionPolicy::interactive(ask);
  if (p.policy.starts_with("file:")) {
    return SelectionPolicy::from_file(parse_selection_list(read_file(p.policy.substr(5))));
  }
  throw Error(ErrorCode::UsageError, "unknown policy '" + p.policy + "'");
}

std::vector<Strategy> parse_strategy_list(const std::string& list) {
  std::vector<Strategy> out;
  for (auto item : detail::split(list, ',')) {
    item = detail::trim(item);
    const auto s = parse_strategy(item);
    if (!s) throw Error(ErrorCode::UsageError, "unknown strategy '" + std::string(item) + "'");
    out.push_back(*s);
  }
  return out;
}

struct CostFlags {
  std::uint64_t base_us = 0;
  std::uint64_t per_kb_us = 0;
};

void add_cost_flags(CLI::App* cmd, CostFlags& c) {
  cmd->add_option("--load-base-us", c.base_us, "Simulated fixed cost per module load");
  cmd->add_option("--load-per-kb-us", c.per_kb_us, "Simulated cost per KB of module size");
}

int fail(std::ostream& err, ErrorCode code, const std::string& detail) {
  err << "error: " << to_string(code) << ": " << detail << '\n';
  return code == ErrorCode::UsageError || code == ErrorCode::ConfigError ? 2 : 1;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Simulated dynamic kernel-module registration and loading", "modattach"};
  app.require_subcommand(1);

  // gen
  GenOptions gen;
  std::string gen_catalog, gen_inventory;
  auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic catalog and inventory");
  cmd_gen->add_option("--modules", gen.modules, "Number of modules")->required();
  cmd_gen->add_option("--max-depth", gen.max_depth, "Longest dependency chain")->required();
  cmd_gen->add_option("--seed", gen.seed, "RNG seed");
  cmd_gen->add_option("--hw-coverage", gen.hw_coverage, "Fraction of gated modules present");
  cmd_gen->add_option("--catalog", gen_catalog, "Output catalog path")->required();
  cmd_gen->add_option("--inventory", gen_inventory, "Output inventory path")->required();

  // register
  std::string reg_catalog, reg_version = "v0";
  std::optional<std::string> reg_inventory, reg_index;
  PolicyFlags reg_policy;
  auto* cmd_register = app.add_subcommand("register", "Build an index file from a selection");
  cmd_register->add_option("--catalog", reg_catalog, "Catalog path")->required();
  cmd_register->add_option("--version", reg_version, "Index version")
      ->check(CLI::IsMember({"v0", "v1"}));
  cmd_register->add_option("--inventory", reg_inventory, "Inventory path (required for v1)");
  cmd_register->add_option("--index", reg_index, "Output index path (default: stdout)");
  add_policy_flags(cmd_register, reg_policy);

  // load
  std::string load_catalog_path, load_index, load_strategy = "stage0", load_format = "text";
  std::optional<std::string> load_inventory_path, load_trace;
  unsigned load_workers = 4;
  CostFlags load_cost;
  auto* cmd_load = app.add_subcommand("load", "Run one loading session");
  cmd_load->add_option("--catalog", load_catalog_path, "Catalog path")->required();
  cmd_load->add_option("--index", load_index, "Index path")->required();
  cmd_load->add_option("--inventory", load_inventory_path, "Inventory path");
  cmd_load->add_option("--strategy", load_strategy, "stage0 | stage1 | stage2 | stage3")
      ->check(CLI::IsMember({"stage0", "stage1", "stage2", "stage3"}));
  cmd_load->add_option("--workers", load_workers, "Simulated cores");
  cmd_load->add_option("--trace", load_trace, "Write the event trace here");
  cmd_load->add_option("--format", load_format, "text | csv")
      ->check(CLI::IsMember({"text", "csv"}));
  add_cost_flags(cmd_load, load_cost);

  // bench
  std::string bench_catalog, bench_inventory, bench_strategies = "stage0,stage1,stage2,stage3",
                                              bench_format = "text";
  unsigned bench_workers = 8, bench_reps = 5;
  PolicyFlags bench_policy;
  CostFlags bench_cost;
  auto* cmd_bench = app.add_subcommand("bench", "Compare strategies on identical inputs");
  cmd_bench->add_option("--catalog", bench_catalog, "Catalog path")->required();
  cmd_bench->add_option("--inventory", bench_inventory, "Inventory path")->required();
  cmd_bench->add_option("--strategy,--strategies", bench_strategies,
                        "Comma-separated strategies");
  cmd_bench->add_option("--workers", bench_workers, "Simulated cores");
  cmd_bench->add_option("--reps", bench_reps, "Repetitions per strategy (median reported)");
  cmd_bench->add_option("--format", bench_format, "text | csv")
      ->check(CLI::IsMember({"text", "csv"}));
  add_policy_flags(cmd_bench, bench_policy);
  add_cost_flags(cmd_bench, bench_cost);

  // report
  std::string rep_trace, rep_catalog, rep_format = "text";
  auto* cmd_report = app.add_subcommand("report", "Summarise a trace file");
  cmd_report->add_option("--trace", rep_trace, "Trace path")->required();
  cmd_report->add_option("--catalog", rep_catalog, "Catalog path")->required();
  cmd_report->add_option("--format", rep_format, "text | csv")
      ->check(CLI::IsMember({"text", "csv"}));

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, ErrorCode::UsageError, e.what());
  }

  std::optional<Trace> pending_trace;
  try {
    if (*cmd_gen) {
      const auto fixture = generate_fixture(gen);
      write_file(gen_catalog, fixture.catalog_text);
      write_file(gen_inventory, fixture.inventory_text);
      return 0;
    }

    if (*cmd_register) {
      const auto version = reg_version == "v1" ? IndexVersion::V1 : IndexVersion::V0;
      if (version == IndexVersion::V1 && !reg_inventory) {
        throw Error(ErrorCode::UsageError, "--version v1 requires --inventory");
      }
      const auto catalog = load_catalog(reg_catalog);
      const auto policy = make_policy(reg_policy, in, err);
      const auto index = version == IndexVersion::V1
                             ? register_v1(catalog, policy, load_inventory(reg_inventory))
                             : register_v0(catalog, policy);
      const auto text = write_index(index);
      if (reg_index) {
        write_file(*reg_index, text);
      } else {
        out << text;
      }
      return 0;
    }

    if (*cmd_load) {
      if (load_trace) pending_trace.emplace();
      const auto strategy = *parse_strategy(load_strategy);
      if ((strategy == Strategy::Stage2 || strategy == Strategy::Stage3) && load_workers < 2) {
        throw Error(ErrorCode::UsageError,
                    std::string(to_string(strategy)) + " needs --workers >= 2");
      }
      const auto catalog = load_catalog(load_catalog_path);
      const auto index =
          read_index(read_file(load_index), catalog, index_version_for(strategy));
      const auto inventory = load_inventory(load_inventory_path);
      const StrategyConfig config{strategy, load_workers,
                                  {load_cost.base_us, load_cost.per_kb_us}};
      auto result = run_load(catalog, index, inventory, config);
      pending_trace = result.trace;
      if (load_trace) write_file(*load_trace, write_trace(result.trace));
      pending_trace.reset();

      const auto timing = timing_from_trace(result.trace);
      const auto space = space_report(catalog, result.state);
      out << (load_format == "csv" ? format_session_csv(timing, space)
                                   : format_session_text(timing, space));
      const auto problems = trace_violations(catalog, result.trace);
      if (!problems.empty()) throw Error(ErrorCode::TraceViolation, problems.front());
      return 0;
    }

    if (*cmd_bench) {
      const auto catalog = load_catalog(bench_catalog);
      const auto inventory = parse_inventory(read_file(bench_inventory));
      BenchOptions options{parse_strategy_list(bench_strategies), bench_workers, bench_reps,
                           {bench_cost.base_us, bench_cost.per_kb_us}};
      const auto needs_workers = std::any_of(
          options.strategies.begin(), options.strategies.end(),
          [](Strategy s) { return s == Strategy::Stage2 || s == Strategy::Stage3; });
      if (needs_workers && bench_workers < 2) {
        throw Error(ErrorCode::UsageError, "stage2/stage3 need --workers >= 2");
      }
      const auto report = bench(catalog, make_policy(bench_policy, in, err), inventory, options);
      out << (bench_format == "csv" ? format_bench_csv(report) : format_bench_text(report));
      for (const auto& row : report.rows) {
        if (row.violations != 0) {
          throw Error(ErrorCode::TraceViolation,
                      std::string(to_string(row.strategy)) + " produced an unsound trace");
        }
      }
      return 0;
    }

    if (*cmd_report) {
      const auto catalog = load_catalog(rep_catalog);
      const auto trace = parse_trace(read_file(rep_trace));
      const auto timing = timing_from_trace(trace);
      const auto space = space_report(catalog, loaded_positions(catalog, trace));
      out << (rep_format == "csv" ? format_session_csv(timing, space)
                                  : format_session_text(timing, space));
      return 0;
    }
  } catch (const Error& e) {
    if (pending_trace && load_trace) {
      try {
        write_file(*load_trace, write_trace(*pending_trace));
      } catch (const Error&) {
      }
    }
    return fail(err, e.code(), e.what());
  }
  return fail(err, ErrorCode::UsageError, "no subcommand");
}

}  // namespace modattach

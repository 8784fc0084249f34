#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include <gridlab/error.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace gridlab::cli {

namespace {

std::string suggestion_for(const gridlab::Error& e) {
  const std::string& m = e.module();
  if (dynamic_cast<const EnumerationBudgetExceeded*>(&e) != nullptr) {
    return "raise [experiment] budget or lower the observable radius";
  }
  if (m == "lattice-core") {
    return "lower [experiment] renorm_cadence or shorten the horizon T";
  }
  if (m == "group-flow") return "check that m and n match the letter and curve dimensions";
  if (m == "ifs-fractal") return "raise [experiment] tol or use longer words";
  if (m == "diophantine") return "lower qmax / Q or raise [experiment] budget";
  if (m == "diagnostics") return "compare accumulators of the same observable";
  return "check the configuration";
}

void write_file(const std::string& path, const std::string& body) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("--out", "cannot write '" + path + "'");
  f << body;
  if (!f) throw ConfigError("--out", "failed while writing '" + path + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gridlab experiment runner: flows, walks and Diophantine scans on spaces of grids"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_prefix;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--seed", seed, "master seed (overrides [experiment] seed)");
  app.add_option("--out", out_prefix, "output path prefix; writes PREFIX.csv and PREFIX.json");
  app.add_option("--format", format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    ConfigDoc doc = ConfigDoc::load(config_path);
    if (seed) doc.set("experiment", "seed", std::to_string(*seed));
    if (threads) doc.set("experiment", "threads", std::to_string(*threads));
    if (out_prefix) doc.set("output", "prefix", *out_prefix);
    if (format) doc.set("output", "format", *format);

    const auto thread_count = doc.get_uint("experiment", "threads", 1);
    if (thread_count < 1 || thread_count > 1024) {
      throw ConfigError(key_name("experiment", "threads"), "must lie in [1, 1024]");
    }
    const std::string prefix = doc.get_string("output", "prefix", "gridlab_out");
    const std::string fmt = doc.get_string("output", "format", "both");
    if (fmt != "csv" && fmt != "json" && fmt != "both") {
      throw ConfigError(key_name("output", "format"), "expected csv, json or both");
    }

    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult result =
        run_experiment(doc, static_cast<unsigned>(thread_count));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const bool want_csv = fmt != "json";
    const bool want_json = fmt != "csv";
    if (want_csv) write_file(prefix + ".csv", result.table.to_csv());
    if (want_json) {
      nlohmann::json config = nlohmann::json::object();
      for (const auto& [section, keys] : doc.sections()) {
        config[section] = nlohmann::json(keys);
      }
      nlohmann::json summary = {
          {"version", kVersion},
          {"experiment", doc.get_string("experiment", "name")},
          {"seed", doc.get_uint("experiment", "seed", 0)},
          {"threads", thread_count},
          {"wall_time_seconds", wall},
          {"config", config},
          {"config_text", doc.to_text()},
          {"csv", want_csv ? nlohmann::json(prefix + ".csv") : nlohmann::json(nullptr)},
          {"rows", result.table.rows.size()},
          {"results", result.results},
      };
      write_file(prefix + ".json", summary.dump(2) + "\n");
    }
    out << doc.get_string("experiment", "name") << ": " << result.table.rows.size()
        << " rows";
    if (want_csv) out << ", " << prefix << ".csv";
    if (want_json) out << ", " << prefix << ".json";
    out << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gridlab::Error& e) {
    err << "numerical failure in module " << e.module() << ": " << e.what() << "\n"
        << "suggestion: " << suggestion_for(e) << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure in module cli: " << e.what() << "\n"
        << "suggestion: check the configuration\n";
    return kExitNumerical;
  }
}

}  // namespace gridlab::cli

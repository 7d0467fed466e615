#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "posrate/error.hpp"

namespace {

using posrate::cli::RunConfig;

constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--seed", c.seed, "Master seed for replicate streams");
  cmd->add_option("--replicates", c.replicates, "Monte Carlo replicates (0 = exact only)");
  cmd->add_option("--tol", c.tol, "Tolerance override");
  cmd->add_option("--out", c.out, "Output directory (default: $POSRATE_OUT)");
  auto* exact = cmd->add_flag("--exact", "Rational track (default)");
  auto* flt = cmd->add_flag_callback("--float", [&c] { c.exact = false; }, "Float track");
  exact->excludes(flt);
}

int emit_error(std::string_view kind, std::string_view message, int code) {
  std::cerr << posrate::error_json(kind, message).dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"posrate: distributions on partially ordered sets"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", c.threads, "Worker threads for replicates and grid cells")->check(CLI::PositiveNumber);

  auto* mobius = app.add_subcommand("mobius", "Möbius function on comparable pairs");
  mobius->add_option("--poset", c.poset, "Poset JSON file or catalog reference")->required();

  auto* cumulative = app.add_subcommand("cumulative", "Cumulative functions lambda_0..lambda_n");
  cumulative->add_option("--poset", c.poset, "Poset JSON file or catalog reference")->required();
  cumulative->add_option("--n", c.n, "Highest order");

  auto* upf = app.add_subcommand("upf", "Upper probability function of a distribution");
  upf->add_option("--dist", c.dist, "Distribution JSON file or catalog reference")->required();

  auto* rate = app.add_subcommand("rate", "Rate function and constant-rate check");
  rate->add_option("--dist", c.dist, "Distribution JSON file or catalog reference")->required();
  rate->add_option("--alpha", c.alpha, "Expected constant rate");

  auto add_tree = [&c](CLI::App* cmd, bool required) {
    auto* t = cmd->add_option("--tree", c.tree, "kary:K, a registered rule, or a tree spec JSON file");
    if (required) t->required();
    cmd->add_option("--alpha", c.alpha, "Constant rate");
    cmd->add_option("--split", c.split, "uniform | weighted:w,... | rotating:w,... | seeded:S");
    cmd->add_option("--depth", c.depth, "Truncation depth");
  };

  auto* construct = app.add_subcommand("construct-tree", "Constant-rate law on a rooted tree");
  add_tree(construct, true);

  auto* percolate = app.add_subcommand("percolate", "Percolation of a constant-rate tree law");
  add_tree(percolate, true);
  percolate->add_option("--p", c.p, "Edge survival probability")->required();

  auto* ladder = app.add_subcommand("ladder", "Ladder variable laws f_1..f_n");
  add_tree(ladder, false);
  ladder->add_option("--dist", c.dist, "Distribution JSON file or catalog reference");
  ladder->add_option("--n", c.n, "Number of ladder variables");

  auto* thin = app.add_subcommand("thin", "Thinned ladder process");
  add_tree(thin, false);
  thin->add_option("--dist", c.dist, "Distribution JSON file or catalog reference");
  thin->add_option("--p", c.p, "Acceptance probability")->required();

  auto* products = app.add_subcommand("products", "Ladder versus partial-product kernels");
  add_tree(products, true);

  auto* find = app.add_subcommand("find", "Constant-rate feasibility search");
  find->add_option("--poset", c.poset, "Poset JSON file or catalog reference");
  find->add_option("--tree", c.tree, "Tree spec, materialized to --depth");
  find->add_option("--depth", c.depth, "Truncation depth for --tree");
  find->add_option("--alpha", c.alpha, "Single alpha");
  find->add_option("--alpha-grid", c.alpha_grid, "a:b:step");
  find->add_option("--epsilon", c.epsilon, "Positivity floor");
  find->add_option("--subsets-search", c.subsets_search, "M:m_cap search on the subsets poset");

  auto* poisson = app.add_subcommand("poisson-check", "Necessary marginal conditions on finite subsets");
  poisson->add_option("--alpha", c.alpha, "Rate")->required();
  poisson->add_option("--K", c.K, "Truncation of the marginal");
  poisson->add_option("--marginal", c.marginal, "poisson | geometric:s | JSON array file");

  auto* verify = app.add_subcommand("verify", "Built-in verification suites");
  verify->add_option("--suite", c.suite, "core | trees | ladder | finder | all");

  auto* catalog = app.add_subcommand("catalog", "Named posets and distributions");
  catalog->require_subcommand(1);
  catalog->fallthrough();
  auto* catalog_list = catalog->add_subcommand("list", "List entries");
  auto* catalog_build = catalog->add_subcommand("build", "Build an entry");
  catalog_build->add_option("name", c.catalog_name, "Entry name")->required();
  catalog_build->add_option("--params", c.params, "key=value pairs");

  auto* run = app.add_subcommand("run", "Run a simulation spec");
  run->add_option("--spec", c.spec, "Run spec JSON file")->required();

  for (auto* cmd : {mobius, cumulative, upf, rate, construct, percolate, ladder, thin, products, find, poisson, verify,
                    catalog_list, catalog_build, run}) {
    add_common(cmd, c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("UsageError", e.what(), kExitInputError);
  }

  if (catalog->parsed()) {
    c.command = catalog_list->parsed() ? "catalog-list" : "catalog-build";
  } else {
    for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  }
  if (c.out.empty()) {
    if (const char* env = std::getenv("POSRATE_OUT")) c.out = env;
  }

  try {
    const auto out = posrate::cli::run_command(c);
    const std::string json = out.report.dump(2) + "\n";
    std::cout << json;
    if (!c.out.empty()) {
      const std::filesystem::path dir(c.out);
      posrate::write_text_file(dir / (c.command + ".json"), json);
      if (out.csv) posrate::write_text_file(dir / (c.command + ".csv"), out.csv->str());
    }
    return out.passed ? 0 : kExitCheckFailed;
  } catch (const posrate::Error& e) {
    return emit_error(posrate::to_string(e.kind()), e.what(),
                      posrate::is_input_error(e.kind()) ? kExitInputError : kExitCheckFailed);
  } catch (const std::exception& e) {
    return emit_error("InternalError", e.what(), kExitCheckFailed);
  }
}

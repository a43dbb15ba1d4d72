#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "polycrit/errors.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace polycrit;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(what + ": " + e.what());
  }
}

// A run manifest resolves to the config it embeds.
json load_config(const std::string& path) {
  json j = parse_json(read_file(path), path);
  if (!j.is_object()) throw UsageError(path + ": expected a JSON object");
  if (j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

// "a:b" or "a"
std::pair<int, int> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) return {std::stoi(s), std::stoi(s)};
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw UsageError("bad range '" + s + "'");
  }
}

template <class T>
T get(const json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

void write_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw UsageError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

suites::SuiteResult run(const json& cfg) {
  const auto command = get<std::string>(cfg, "command");
  const auto seed = get<std::uint64_t>(cfg, "seed");
  const int jobs = get<int>(cfg, "jobs");
  std::optional<double> tol;
  if (cfg.contains("tol")) tol = get<double>(cfg, "tol");

  if (command == "bubble-check") {
    suites::BubbleCheckConfig c;
    c.jobs = jobs;
    if (tol) c.numeric_tol = *tol;
    if (cfg.contains("n_range") || cfg.contains("k_range")) {
      const auto nr = cfg.contains("n_range") ? get<std::pair<int, int>>(cfg, "n_range") : std::pair{3, 12};
      const auto kr = cfg.contains("k_range") ? get<std::pair<int, int>>(cfg, "k_range") : std::pair{1, 4};
      bool invalid = false;
      for (int k = kr.first; k <= kr.second; ++k)
        for (int n = nr.first; n <= nr.second; ++n) {
          if (k >= 1 && n > 2 * k)
            c.pairs.emplace_back(n, k);
          else
            invalid = true;
        }
      if (c.pairs.empty() || (invalid && nr.first == nr.second && kr.first == kr.second))
        throw UsageError("no admissible (n, k) with n > 2k in the requested ranges");
    }
    return suites::bubble_check(c);
  }
  if (command == "cayley-green") {
    suites::CayleyGreenConfig c;
    c.n = get<int>(cfg, "n");
    c.k = get<int>(cfg, "k");
    c.pairs = get<int>(cfg, "pairs");
    c.seed = seed;
    if (tol) c.green_tol = *tol;
    return suites::cayley_green(c);
  }
  if (command == "tree") {
    suites::TreeSuiteConfig c;
    if (!cfg.contains("tree")) throw UsageError("tree needs a configuration file");
    c.tree = tree_from_json(cfg["tree"].dump());
    if (cfg.contains("alphas")) c.alphas = get<std::vector<double>>(cfg, "alphas");
    c.seed = seed;
    return suites::tree(c);
  }
  if (command == "pohozaev") {
    suites::PohozaevSuiteConfig c;
    c.suite = get<std::string>(cfg, "suite");
    c.jobs = jobs;
    if (tol) c.tol = *tol;
    const bool has_k = cfg.contains("k"), has_n = cfg.contains("n");
    if (has_k != has_n) throw UsageError("pohozaev needs both k and n, or neither");
    if (has_k) c.pairs.emplace_back(get<int>(cfg, "k"), get<int>(cfg, "n"));
    return suites::pohozaev(c);
  }
  if (command == "lemmas") {
    suites::LemmaSuiteConfig c;
    c.seed = seed;
    if (cfg.contains("alphas")) c.alphas = get<std::vector<double>>(cfg, "alphas");
    return suites::lemmas(c);
  }
  if (command == "solve") {
    suites::SolveConfig c;
    c.params = {get<int>(cfg, "n"), get<int>(cfg, "k"), get<int>(cfg, "p"), 0.0};
    c.mu_grid = get<std::vector<double>>(cfg, "mu_grid");
    if (cfg.contains("seed_d")) c.seed_d = get<std::vector<double>>(cfg, "seed_d");
    if (c.mu_grid.empty()) throw UsageError("mu grid is empty");
    return suites::solve(c);
  }
  throw UsageError("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification suites and experiments for critical polyharmonic problems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<double> tol;
  app.add_option("--config", config_path, "JSON run configuration or a previous run manifest");
  app.add_option("--out", out_dir, "output root (default $POLYCRIT_OUT, then ./polycrit-out)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "override the command's main tolerance");
  app.fallthrough();

  auto* bubble = app.add_subcommand("bubble-check", "exact bubble identity, numeric cross-check, decay slopes");
  std::string n_range, k_range;
  bubble->add_option("--n", n_range, "dimension range a:b");
  bubble->add_option("--k", k_range, "order range a:b");

  auto* cg = app.add_subcommand("cayley-green", "Cayley transform and Green's function suites");
  std::optional<int> cg_n, cg_k, pairs;
  cg->add_option("--n", cg_n);
  cg->add_option("--k", cg_k);
  cg->add_option("--pairs", pairs, "random point pairs");

  auto* tr = app.add_subcommand("tree", "influence data, dominance, interaction and eta tables");
  std::string tree_file, alphas;
  tr->add_option("file", tree_file, "bubble-tree configuration (JSON)");
  tr->add_option("--alphas", alphas, "comma-separated family sweep");

  auto* po = app.add_subcommand("pohozaev", "Pohozaev identity suites");
  std::optional<int> po_k, po_n;
  std::string suite;
  po->add_option("--k", po_k);
  po->add_option("--n", po_n);
  po->add_option("--suite", suite, "manufactured or bubble");

  auto* lm = app.add_subcommand("lemmas", "weighted convolution bounds over the scale sweep");
  std::string lm_alphas;
  lm->add_option("--alphas", lm_alphas, "comma-separated family sweep");

  auto* so = app.add_subcommand("solve", "radial continuation branch");
  std::optional<int> so_n, so_k, so_p;
  std::optional<std::string> mu_grid, seed_d;
  so->add_option("--n", so_n);
  so->add_option("--k", so_k);
  so->add_option("--p", so_p);
  so->add_option("--mu-grid", mu_grid, "comma-separated values of mu (mu = -lambda)");
  so->add_option("--seed-d", seed_d, "comma-separated initial values (-Delta)^i u(0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  json cfg;
  try {
    cfg = config_path.empty() ? json::object() : load_config(config_path);
    const std::string command = sub->get_name();
    if (cfg.contains("command") && cfg["command"] != command)
      throw UsageError("config is for '" + cfg["command"].get<std::string>() + "', not '" + command + "'");

    // defaults, then the file, then flags
    json resolved = {{"command", command}, {"seed", 0}, {"jobs", 1}};
    if (command == "cayley-green") resolved.update({{"n", 3}, {"k", 1}, {"pairs", 100}});
    if (command == "pohozaev") resolved["suite"] = "manufactured";
    if (command == "solve") resolved.update({{"n", 7}, {"k", 1}, {"p", 0}, {"mu_grid", {-0.5, -0.25, -0.1, -0.05, -0.02}}});
    resolved.update(cfg);
    cfg = std::move(resolved);

    if (!out_dir.empty()) cfg["out"] = out_dir;
    if (!cfg.contains("out")) {
      const char* env = std::getenv("POLYCRIT_OUT");
      cfg["out"] = env && *env ? env : "polycrit-out";
    }
    if (seed) cfg["seed"] = *seed;
    if (jobs) cfg["jobs"] = *jobs;
    if (tol) cfg["tol"] = *tol;
    if (!n_range.empty()) cfg["n_range"] = parse_range(n_range);
    if (!k_range.empty()) cfg["k_range"] = parse_range(k_range);
    if (cg_n) cfg["n"] = *cg_n;
    if (cg_k) cfg["k"] = *cg_k;
    if (pairs) cfg["pairs"] = *pairs;
    if (!tree_file.empty()) cfg["tree"] = parse_json(read_file(tree_file), tree_file);
    if (!alphas.empty()) cfg["alphas"] = parse_list(alphas);
    if (!lm_alphas.empty()) cfg["alphas"] = parse_list(lm_alphas);
    if (po_k) cfg["k"] = *po_k;
    if (po_n) cfg["n"] = *po_n;
    if (!suite.empty()) cfg["suite"] = suite;
    if (so_n) cfg["n"] = *so_n;
    if (so_k) cfg["k"] = *so_k;
    if (so_p) cfg["p"] = *so_p;
    if (mu_grid) cfg["mu_grid"] = parse_list(*mu_grid);
    if (seed_d) cfg["seed_d"] = parse_list(*seed_d);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  suites::SuiteResult result;
  try {
    result = run(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AmbiguityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AccuracyError& e) {
    std::cerr << "accuracy failure: " << e.what() << "\n";
    return 3;
  } catch (const IntegrationFailure& e) {
    std::cerr << "accuracy failure: " << e.what() << " (radius " << e.blowup_radius() << ")\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "accuracy failure: " << e.what() << "\n";
    return 3;
  }

  const bool ok = result.passed();
  const auto failures = result.failures();
  try {
    const fs::path dir = fs::path(cfg["out"].get<std::string>()) / cfg["command"].get<std::string>();
    fs::create_directories(dir);
    json report = result.checks_json();
    report["passed"] = ok;
    report["failures"] = failures;
    report["details"] = result.report;
    write_atomic(dir / "report.json", report.dump(2) + "\n");
    for (const auto& [name, contents] : result.files) write_atomic(dir / name, contents);
    json manifest = {{"timestamp", timestamp()}, {"config", cfg}, {"passed", ok}};
    json files = json::array({"report.json"});
    for (const auto& [name, contents] : result.files) files.push_back(name);
    manifest["files"] = files;
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << cfg["command"].get<std::string>() << ": " << (ok ? "pass" : "FAIL") << " (" << result.checks.size()
              << " checks), reports in " << dir.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& f : failures) std::cerr << "  " << f << "\n";
  if (!result.accuracy_failures.empty()) return 3;
  return ok ? 0 : 1;
}

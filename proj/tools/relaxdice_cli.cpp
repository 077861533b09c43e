// Command-line front end: gen-data, train, eval, sweep, verify.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaxdice/binary_io.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/experiment.hpp"
#include "relaxdice/extraction.hpp"
#include "relaxdice/gridworld.hpp"
#include "relaxdice/pipeline.hpp"
#include "relaxdice/pointmass.hpp"
#include "relaxdice/text.hpp"
#include "relaxdice/verify.hpp"

namespace fs = std::filesystem;
using namespace relaxdice;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    std::string seeds;
    std::string method;
    std::string level;
    double alpha = -1.0;
    int threads = -1;
};

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--set", o.overrides, "override a config entry, key=value (repeatable)");
    app->add_option("--out", o.out, "output directory (overrides output_dir)");
    app->add_option("--seeds", o.seeds, "comma-separated seeds");
    app->add_option("--method", o.method, "relaxdice | relaxdice-drc | demodice-limit | bc | bc-drc");
    app->add_option("--level", o.level, "L1 | L2 | L3 | L4 | custom");
    app->add_option("--alpha", o.alpha, "regularization weight");
    app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

ExperimentConfig resolve(const CommonOptions& o) {
    std::map<std::string, std::string> entries;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        entries = parse_key_values(buf.str());
    }
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
        entries[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
    if (!o.out.empty()) entries["output_dir"] = o.out;
    if (!o.seeds.empty()) entries["seeds"] = o.seeds;
    if (!o.method.empty()) entries["method"] = o.method;
    if (!o.level.empty()) entries["level"] = o.level;
    if (o.alpha >= 0.0) entries["alpha"] = format_double(o.alpha);
    if (o.threads >= 0) entries["threads"] = std::to_string(o.threads);
    ExperimentConfig c;
    apply_config(c, entries);
    c.validate();
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

void write_config_echo(const ExperimentConfig& c, const fs::path& dir) {
    write_text(dir / "config.txt", "# config_hash = " + config_hash(c) + "\n" + config_to_text(c));
}

template <class T>
std::vector<T> parse_list(const std::string& text, T (*parse)(const std::string&)) {
    std::vector<T> out;
    for (const auto& part : split(text, ','))
        if (!trim(part).empty()) out.push_back(parse(trim(part)));
    return out;
}

double parse_alpha(const std::string& s) { return parse_double(s); }

std::string policy_table_csv(const std::vector<double>& table, int num_actions) {
    std::ostringstream o;
    o << "state,action,prob\n";
    for (std::size_t i = 0; i < table.size(); ++i)
        o << i / num_actions << ',' << i % num_actions << ',' << format_double(table[i]) << '\n';
    return o.str();
}

GridworldSpec grid_spec_of(const ExperimentConfig& c) {
    GridworldSpec g;
    g.width = c.grid_width;
    g.height = c.grid_height;
    g.slip = c.slip;
    g.discount = c.gamma;
    return g;
}

int cmd_gen_data(const CommonOptions& o) {
    const auto c = resolve(o);
    fs::create_directories(c.output_dir);
    write_config_echo(c, c.output_dir);
    for (auto seed : c.seeds) {
        const auto data = generate_data(c, seed);
        const fs::path dir = fs::path(c.output_dir) / ("seed_" + std::to_string(seed));
        fs::create_directories(dir);
        save_dataset(data.expert, (dir / "expert.rdxd").string());
        save_dataset(data.suboptimal, (dir / "suboptimal.rdxd").string());
        if (c.env == Environment::gridworld) save_mdp(make_gridworld(grid_spec_of(c)).mdp, (dir / "mdp.rdxm").string());
        std::cout << "seed " << seed << ": D^E " << data.expert.size() << " records, D^U " << data.suboptimal.size()
                  << " records, " << data.suboptimal.num_initial_states() << " initial states -> " << dir.string()
                  << "\n";
    }
    return 0;
}

void save_run(const ExperimentConfig& c, const RunResult& run, const fs::path& dir) {
    fs::create_directories(dir);
    if (run.solution) write_solution(*run.solution, (dir / "solution").string());
    if (!run.policy_table.empty()) {
        const int A = c.env == Environment::gridworld ? kGridActions : 1;
        write_text(dir / "policy.csv", policy_table_csv(run.policy_table, A));
    }
    if (run.policy_net) write_file((dir / "policy.bin").string(), run.policy_net->serialize());
}

int cmd_train(const CommonOptions& o, const std::string& expert_path, const std::string& suboptimal_path) {
    const auto c = resolve(o);
    fs::create_directories(c.output_dir);
    write_config_echo(c, c.output_dir);
    ScoreReport report;
    if (!expert_path.empty() || !suboptimal_path.empty()) {
        if (expert_path.empty() || suboptimal_path.empty())
            throw InvalidArgument("--expert and --suboptimal must be given together");
        RunData data{load_dataset(expert_path), load_dataset(suboptimal_path)};
        report.config = c;
        report.reference = reference_scores(c);
        report.runs.push_back(run_single(c, c.seeds.front(), &data));
        report.mean_return = report.runs.front().raw_return;
        report.mean_normalized = report.runs.front().normalized;
    } else {
        report = run_experiment(c);
    }
    write_text(fs::path(c.output_dir) / "results.csv", csv_header() + csv_rows(report));
    for (const auto& run : report.runs)
        save_run(c, run, fs::path(c.output_dir) / ("seed_" + std::to_string(run.seed)));
    std::cout << to_string(c.method) << " on " << to_string(c.env) << " " << to_string(c.level) << ": normalized "
              << format_double(report.mean_normalized) << " +- " << format_double(report.halfwidth) << " over "
              << report.runs.size() << " seeds (expert " << format_double(report.reference.expert) << ", random "
              << format_double(report.reference.random) << ")\n";
    return 0;
}

std::vector<double> load_policy_csv(const std::string& path, int S, int A) {
    const auto bytes = read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    std::getline(in, line);
    std::vector<double> table(static_cast<std::size_t>(S) * A, -1.0);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw FormatError("policy row needs state,action,prob");
        const auto s = parse_int(f[0]), a = parse_int(f[1]);
        if (s < 0 || s >= S || a < 0 || a >= A) throw FormatError("policy row out of range");
        table[static_cast<std::size_t>(s) * A + a] = parse_double(f[2]);
    }
    for (double p : table)
        if (p < 0.0) throw FormatError("policy table is incomplete");
    return table;
}

int cmd_eval(const CommonOptions& o, const std::string& policy_path) {
    const auto c = resolve(o);
    const auto ref = reference_scores(c);
    double ret = 0.0;
    if (c.env == Environment::gridworld) {
        const auto grid = make_gridworld(grid_spec_of(c));
        const int S = grid.mdp.num_states(), A = grid.mdp.num_actions();
        const TabularPolicy pi(S, A, load_policy_csv(policy_path, S, A));
        ret = policy_return(grid.mdp, pi, grid.reward);
    } else {
        const auto net = Mlp::deserialize(read_file(policy_path));
        const PointMass env([&] {
            PointMassSpec p;
            p.discount = c.gamma;
            return p;
        }());
        ret = pointmass_return(env, pointmass_net_policy(net), c.eval_episodes, derive_seed(c.seeds.front(), 7));
    }
    std::cout << "raw_return," << format_double(ret) << "\nnormalized_score,"
              << format_double(normalized_score(ret, ref.random, ref.expert)) << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& alphas, const std::string& methods,
              const std::string& levels) {
    const auto c = resolve(o);
    const auto a = parse_list<double>(alphas, parse_alpha);
    const auto m = parse_list<Method>(methods, method_from_string);
    const auto l = parse_list<MixLevel>(levels, mix_level_from_string);
    const auto reports = alpha_sweep(c, l, m, a);
    fs::create_directories(c.output_dir);
    write_config_echo(c, c.output_dir);
    std::string csv = csv_header();
    for (const auto& r : reports) csv += csv_rows(r);
    write_text(fs::path(c.output_dir) / "sweep.csv", csv);

    std::ostringstream summary;
    summary << "level,variant,alpha,mean_normalized,halfwidth\n";
    for (const auto& r : reports)
        summary << to_string(r.config.level) << ',' << to_string(r.config.method) << ',' << format_double(r.config.alpha)
                << ',' << format_double(r.mean_normalized) << ',' << format_double(r.halfwidth) << '\n';
    write_text(fs::path(c.output_dir) / "summary.csv", summary.str());

    std::ostringstream ranges;
    ranges << "level,variant,min_score,max_score,range\n";
    for (const auto& s : sweep_ranges(reports))
        ranges << to_string(s.level) << ',' << to_string(s.method) << ',' << format_double(s.min_score) << ','
               << format_double(s.max_score) << ',' << format_double(s.max_score - s.min_score) << '\n';
    write_text(fs::path(c.output_dir) / "ranges.csv", ranges.str());
    for (auto level : l)
        write_text(fs::path(c.output_dir) / ("sweep_" + to_string(level) + ".svg"), sweep_svg(reports, level));
    std::cout << summary.str() << ranges.str();
    return 0;
}

int cmd_verify(const std::string& criteria, const std::string& work, int threads) {
    VerifyOptions opt;
    opt.work_dir = work;
    opt.threads = threads < 0 ? 0 : threads;
    std::error_code ec;
    const auto self = fs::canonical("/proc/self/exe", ec);
    if (!ec) opt.cli_path = self.string();
    std::vector<int> ids;
    if (criteria.empty())
        for (int i = 1; i <= kNumCriteria; ++i) ids.push_back(i);
    else
        for (const auto& part : split(criteria, ',')) ids.push_back(static_cast<int>(parse_int(part)));
    int failed = 0;
    for (int id : ids) {
        const auto r = run_criterion(id, opt);
        std::cout << format_result(r) << std::endl;
        failed += !r.passed;
    }
    std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RelaxDICE offline imitation learning toolkit"};
    app.require_subcommand(1);

    CommonOptions gen_o, train_o, eval_o, sweep_o;
    auto* gen = app.add_subcommand("gen-data", "generate D^E and D^U files");
    add_common(gen, gen_o);

    auto* train = app.add_subcommand("train", "train, extract and evaluate; writes results.csv");
    add_common(train, train_o);
    std::string expert_path, suboptimal_path;
    train->add_option("--expert", expert_path, "D^E file from gen-data")->check(CLI::ExistingFile);
    train->add_option("--suboptimal", suboptimal_path, "D^U file from gen-data")->check(CLI::ExistingFile);

    auto* eval = app.add_subcommand("eval", "evaluate a saved policy");
    add_common(eval, eval_o);
    std::string policy_path;
    eval->add_option("--policy", policy_path, "policy.csv (gridworld) or policy.bin (pointmass)")
        ->required()
        ->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "alpha sensitivity sweep with CSV tables and SVG plots");
    add_common(sweep, sweep_o);
    std::string alphas = "0.05,0.1,0.2,0.3,0.4,0.5", methods = "relaxdice,demodice-limit", levels = "L1,L2,L3,L4";
    sweep->add_option("--alphas", alphas, "comma-separated alphas")->capture_default_str();
    sweep->add_option("--methods", methods, "comma-separated methods")->capture_default_str();
    sweep->add_option("--levels", levels, "comma-separated mixture levels")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "run the oracle battery; nonzero exit on any failure");
    std::string criteria, work = "verify_work";
    int verify_threads = 0;
    verify->add_option("--criteria", criteria, "comma-separated criterion ids (default all)");
    verify->add_option("--work", work, "scratch directory")->capture_default_str();
    verify->add_option("--threads", verify_threads, "worker threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_gen_data(gen_o);
        if (*train) return cmd_train(train_o, expert_path, suboptimal_path);
        if (*eval) return cmd_eval(eval_o, policy_path);
        if (*sweep) return cmd_sweep(sweep_o, alphas, methods, levels);
        if (*verify) return cmd_verify(criteria, work, verify_threads);
    } catch (const TrainingFailure& e) {
        std::cerr << "training failure at step " << e.step() << ": " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

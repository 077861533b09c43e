#include "relaxdice/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "relaxdice/density_ratio.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/extraction.hpp"
#include "relaxdice/text.hpp"

namespace relaxdice {

std::string to_string(Environment env) { return env == Environment::gridworld ? "gridworld" : "pointmass"; }

Environment environment_from_string(const std::string& name) {
    if (name == "gridworld") return Environment::gridworld;
    if (name == "pointmass") return Environment::pointmass;
    throw InvalidArgument("unknown environment '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::relaxdice: return "relaxdice";
        case Method::relaxdice_drc: return "relaxdice-drc";
        case Method::demodice_limit: return "demodice-limit";
        case Method::bc_eta: return "bc";
        case Method::bc_drc_eta: return "bc-drc";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "relaxdice") return Method::relaxdice;
    if (name == "relaxdice-drc") return Method::relaxdice_drc;
    if (name == "demodice-limit") return Method::demodice_limit;
    if (name == "bc") return Method::bc_eta;
    if (name == "bc-drc") return Method::bc_drc_eta;
    throw InvalidArgument("unknown method '" + name + "'");
}

namespace {

bool is_dice(Method m) {
    return m == Method::relaxdice || m == Method::relaxdice_drc || m == Method::demodice_limit;
}

Variant variant_of(Method m) {
    switch (m) {
        case Method::relaxdice_drc: return Variant::relaxdice_drc;
        case Method::demodice_limit: return Variant::demodice_limit;
        default: return Variant::relaxdice;
    }
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InvalidArgument("not a boolean: '" + text + "'");
}

std::size_t parse_count(const std::string& text) {
    const auto v = parse_int(text);
    if (v < 0) throw InvalidArgument("count must be nonnegative: '" + text + "'");
    return static_cast<std::size_t>(v);
}

int parse_small(const std::string& text) { return static_cast<int>(parse_int(text)); }

GridworldSpec grid_spec(const ExperimentConfig& c) {
    GridworldSpec g;
    g.width = c.grid_width;
    g.height = c.grid_height;
    g.slip = c.slip;
    g.discount = c.gamma;
    return g;
}

PointMassSpec point_spec(const ExperimentConfig& c) {
    PointMassSpec p;
    p.discount = c.gamma;
    return p;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw InvalidArgument("seeds must be nonempty");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
    if (is_dice(method) && !(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in [0, 1]");
    if (beta_mode == BetaMode::fixed && !(beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (expert_data == 0) throw InvalidArgument("expert_data must be positive");
    if (level == MixLevel::custom && n_expert == 0 && n_random == 0)
        throw InvalidArgument("custom level needs n_expert or n_random");
    if (steps <= 0 || classifier_steps <= 0 || policy_steps <= 0 || batch_size <= 0 || hidden <= 0)
        throw InvalidArgument("step counts and sizes must be positive");
    if (eval_episodes < 200 && env == Environment::pointmass)
        throw InvalidArgument("pointmass evaluation needs at least 200 episodes");
    if (threads < 0) throw InvalidArgument("threads must be nonnegative");
}

void apply_config(ExperimentConfig& c, const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "env") c.env = environment_from_string(value);
        else if (key == "grid_width") c.grid_width = parse_small(value);
        else if (key == "grid_height") c.grid_height = parse_small(value);
        else if (key == "slip") c.slip = parse_double(value);
        else if (key == "expert_temperature") c.expert_temperature = parse_double(value);
        else if (key == "gamma") c.gamma = parse_double(value);
        else if (key == "level") c.level = mix_level_from_string(value);
        else if (key == "n_random") c.n_random = parse_count(value);
        else if (key == "n_expert") c.n_expert = parse_count(value);
        else if (key == "expert_data") c.expert_data = parse_count(value);
        else if (key == "union_expert") c.union_expert = parse_bool(value);
        else if (key == "method") c.method = method_from_string(value);
        else if (key == "alpha") c.alpha = parse_double(value);
        else if (key == "beta_mode") c.beta_mode = beta_mode_from_string(value);
        else if (key == "beta") c.beta = parse_double(value);
        else if (key == "eta") c.eta = parse_double(value);
        else if (key == "estimator") c.estimator = estimator_mode_from_string(value);
        else if (key == "true_dynamics") c.true_dynamics = parse_bool(value);
        else if (key == "ratio_smoothing") c.ratio_smoothing = parse_double(value);
        else if (key == "seeds") {
            c.seeds.clear();
            for (const auto& part : split(value, ','))
                if (!trim(part).empty()) c.seeds.push_back(static_cast<std::uint64_t>(parse_count(part)));
        }
        else if (key == "steps") c.steps = parse_small(value);
        else if (key == "classifier_steps") c.classifier_steps = parse_small(value);
        else if (key == "policy_steps") c.policy_steps = parse_small(value);
        else if (key == "batch_size") c.batch_size = parse_small(value);
        else if (key == "hidden") c.hidden = parse_small(value);
        else if (key == "policy_learning_rate") c.policy_learning_rate = parse_double(value);
        else if (key == "eval_episodes") c.eval_episodes = parse_small(value);
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "record_timing") c.record_timing = parse_bool(value);
        else if (key == "threads") c.threads = parse_small(value);
        else throw InvalidArgument("unknown config key '" + key + "'");
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig c;
    apply_config(c, parse_key_values(buf.str()));
    c.validate();
    return c;
}

std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream o;
    auto b = [](bool x) { return x ? "true" : "false"; };
    o << "env = " << to_string(c.env) << "\n"
      << "grid_width = " << c.grid_width << "\n"
      << "grid_height = " << c.grid_height << "\n"
      << "slip = " << format_double(c.slip) << "\n"
      << "expert_temperature = " << format_double(c.expert_temperature) << "\n"
      << "gamma = " << format_double(c.gamma) << "\n"
      << "level = " << to_string(c.level) << "\n"
      << "n_random = " << c.n_random << "\n"
      << "n_expert = " << c.n_expert << "\n"
      << "expert_data = " << c.expert_data << "\n"
      << "union_expert = " << b(c.union_expert) << "\n"
      << "method = " << to_string(c.method) << "\n"
      << "alpha = " << format_double(c.alpha) << "\n"
      << "beta_mode = " << to_string(c.beta_mode) << "\n"
      << "beta = " << format_double(c.beta) << "\n"
      << "eta = " << format_double(c.eta) << "\n"
      << "estimator = " << to_string(c.estimator) << "\n"
      << "true_dynamics = " << b(c.true_dynamics) << "\n"
      << "ratio_smoothing = " << format_double(c.ratio_smoothing) << "\n"
      << "seeds = ";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) o << (i ? "," : "") << c.seeds[i];
    o << "\n"
      << "steps = " << c.steps << "\n"
      << "classifier_steps = " << c.classifier_steps << "\n"
      << "policy_steps = " << c.policy_steps << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "hidden = " << c.hidden << "\n"
      << "policy_learning_rate = " << format_double(c.policy_learning_rate) << "\n"
      << "eval_episodes = " << c.eval_episodes << "\n"
      << "output_dir = " << c.output_dir << "\n"
      << "record_timing = " << b(c.record_timing) << "\n"
      << "threads = " << c.threads << "\n";
    return o.str();
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_to_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream o;
    o << std::hex << h;
    return o.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over a combined word.
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RunData generate_data(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    const MixSpec spec = config.level == MixLevel::custom
                             ? MixSpec{config.n_expert, config.n_random, MixLevel::custom}
                             : mix_spec_for_level(config.level, config.n_random);
    spec.validate();
    RunData data;
    TransitionDataset expert_pool, random_pool;
    if (config.env == Environment::gridworld) {
        const auto grid = make_gridworld(grid_spec(config));
        const auto expert = expert_policy(grid, config.expert_temperature);
        const auto random = random_policy(grid);
        const auto n = [](std::size_t k) { return static_cast<std::int64_t>(std::max<std::size_t>(k, 1)); };
        data.expert = sample_trajectories(grid.mdp, expert, n(config.expert_data), derive_seed(seed, 1));
        expert_pool = sample_trajectories(grid.mdp, expert, n(spec.n_expert), derive_seed(seed, 2));
        random_pool = sample_trajectories(grid.mdp, random, n(spec.n_random), derive_seed(seed, 3));
    } else {
        const PointMass env(point_spec(config));
        const auto expert = pointmass_expert(env);
        const auto random = pointmass_random(env);
        const auto n = [](std::size_t k) { return std::max<std::size_t>(k, 1); };
        data.expert = sample_pointmass(env, expert, n(config.expert_data), derive_seed(seed, 1));
        expert_pool = sample_pointmass(env, expert, n(spec.n_expert), derive_seed(seed, 2));
        random_pool = sample_pointmass(env, random, n(spec.n_random), derive_seed(seed, 3));
    }
    data.expert.role = DatasetRole::expert;
    add_provenance(data.expert, "source", "expert");
    data.suboptimal = mix_datasets(expert_pool, random_pool, spec, derive_seed(seed, 4));
    if (config.union_expert) {
        auto& u = data.suboptimal;
        const auto& e = data.expert;
        u.transitions.insert(u.transitions.end(), e.transitions.begin(), e.transitions.end());
        u.initial_states.insert(u.initial_states.end(), e.initial_states.begin(), e.initial_states.end());
        u.states.insert(u.states.end(), e.states.begin(), e.states.end());
        u.actions.insert(u.actions.end(), e.actions.begin(), e.actions.end());
        u.next_states.insert(u.next_states.end(), e.next_states.begin(), e.next_states.end());
        u.initial_state_values.insert(u.initial_state_values.end(), e.initial_state_values.begin(),
                                      e.initial_state_values.end());
        add_provenance(u, "union_expert", std::to_string(e.size()));
    }
    add_provenance(data.suboptimal, "seed", std::to_string(seed));
    data.suboptimal.validate();
    return data;
}

ReferenceScores reference_scores(const ExperimentConfig& config) {
    if (config.env == Environment::gridworld) {
        const auto grid = make_gridworld(grid_spec(config));
        return {policy_return(grid.mdp, expert_policy(grid, config.expert_temperature), grid.reward),
                policy_return(grid.mdp, random_policy(grid), grid.reward)};
    }
    const PointMass env(point_spec(config));
    return {pointmass_return(env, pointmass_expert(env), config.eval_episodes, derive_seed(0, 101)),
            pointmass_return(env, pointmass_random(env), config.eval_episodes, derive_seed(0, 102))};
}

double normalized_score(double score, double random_score, double expert_score) {
    if (!(expert_score > random_score)) throw InvalidArgument("expert score must exceed random score");
    return 100.0 * (score - random_score) / (expert_score - random_score);
}

namespace {

SolverConfig solver_config(const ExperimentConfig& c, std::uint64_t seed) {
    SolverConfig s;
    s.variant = variant_of(c.method);
    s.alpha = c.alpha;
    s.beta_mode = c.beta_mode;
    s.beta = c.beta;
    s.gamma = c.gamma;
    s.estimator_mode = c.estimator;
    s.steps = c.steps;
    s.batch_size = c.batch_size;
    s.seed = derive_seed(seed, 6);
    s.hidden = {c.hidden, c.hidden};
    return s;
}

ExtractionConfig extraction_config(const ExperimentConfig& c, std::uint64_t seed) {
    ExtractionConfig e;
    e.eta = c.eta;
    e.steps = c.policy_steps;
    e.batch_size = c.batch_size;
    e.seed = derive_seed(seed, 8);
    e.learning_rate = c.policy_learning_rate;
    e.hidden = {c.hidden, c.hidden};
    return e;
}

RunResult run_gridworld(const ExperimentConfig& c, std::uint64_t seed, const RunData& data, RunResult out) {
    const auto grid = make_gridworld(grid_spec(c));
    const int S = grid.mdp.num_states();
    const int A = grid.mdp.num_actions();
    const auto ratio = tabular_ratio(data.expert.pair_counts(), data.suboptimal.pair_counts(), S, A,
                                     c.ratio_smoothing);
    std::optional<TabularPolicy> policy;
    if (is_dice(c.method)) {
        out.solution = solve(solver_config(c, seed), data.suboptimal, ratio, c.true_dynamics ? &grid.mdp : nullptr);
        policy = extract_policy_tabular(data.suboptimal, out.solution->omega).policy;
    } else if (c.method == Method::bc_eta) {
        policy = bc_eta_tabular(data.expert, data.suboptimal, c.eta);
    } else {
        policy = bc_drc_eta_tabular(data.expert, data.suboptimal, c.eta, ratio);
    }
    out.policy_table.assign(policy->probs().begin(), policy->probs().end());
    out.raw_return = policy_return(grid.mdp, *policy, grid.reward);
    return out;
}

RunResult run_pointmass(const ExperimentConfig& c, std::uint64_t seed, const RunData& data, RunResult out) {
    const PointMass env(point_spec(c));
    ClassifierConfig cc;
    cc.hidden = {c.hidden, c.hidden};
    cc.steps = c.classifier_steps;
    cc.batch_size = c.batch_size;
    const bool needs_ratio = c.method != Method::bc_eta;
    std::optional<DensityRatioEstimate> ratio;
    if (needs_ratio) ratio = train_classifier(data.expert, data.suboptimal, cc, derive_seed(seed, 5)).estimate;
    const auto ec = extraction_config(c, seed);
    if (is_dice(c.method)) {
        out.solution = solve(solver_config(c, seed), data.suboptimal, *ratio);
        out.policy_net = extract_policy_neural(data.suboptimal, out.solution->omega, ec).policy;
    } else if (c.method == Method::bc_eta) {
        out.policy_net = bc_eta_neural(data.expert, data.suboptimal, ec).policy;
    } else {
        out.policy_net = bc_drc_eta_neural(data.expert, data.suboptimal, &*ratio, ec).policy;
    }
    out.raw_return = pointmass_return(env, pointmass_net_policy(*out.policy_net), c.eval_episodes,
                                      derive_seed(seed, 7));
    return out;
}

}  // namespace

RunResult run_single(const ExperimentConfig& config, std::uint64_t seed, const RunData* data) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RunData generated;
    if (data == nullptr) {
        generated = generate_data(config, seed);
        data = &generated;
    }
    RunResult out;
    out.seed = seed;
    out = config.env == Environment::gridworld ? run_gridworld(config, seed, *data, std::move(out))
                                               : run_pointmass(config, seed, *data, std::move(out));
    const auto ref = reference_scores(config);
    out.normalized = normalized_score(out.raw_return, ref.random, ref.expert);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::pair<double, double> mean_and_halfwidth(const std::vector<double>& xs) {
    if (xs.empty()) throw InvalidArgument("no samples");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double n = static_cast<double>(xs.size());
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t t(n - 1.0);
    const double q = boost::math::quantile(boost::math::complement(t, 0.025));
    return {mean, q * sd / std::sqrt(n)};
}

namespace {

std::vector<ScoreReport> run_all(const std::vector<ExperimentConfig>& configs) {
    struct Job {
        std::size_t config;
        std::size_t seed;
    };
    std::vector<Job> jobs;
    std::vector<ScoreReport> reports(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        configs[i].validate();
        reports[i].config = configs[i];
        reports[i].reference = reference_scores(configs[i]);
        reports[i].runs.resize(configs[i].seeds.size());
        for (std::size_t k = 0; k < configs[i].seeds.size(); ++k) jobs.push_back({i, k});
    }
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            const auto& job = jobs[j];
            const auto& cfg = configs[job.config];
            try {
                reports[job.config].runs[job.seed] = run_single(cfg, cfg.seeds[job.seed]);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    int threads = configs.empty() ? 1 : configs.front().threads;
    if (threads == 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!errors[j]) continue;
        const auto seed = configs[jobs[j].config].seeds[jobs[j].seed];
        try {
            std::rethrow_exception(errors[j]);
        } catch (const TrainingFailure& e) {
            throw TrainingFailure("seed " + std::to_string(seed) + ": " + e.what(), e.step());
        } catch (const std::exception& e) {
            throw Error("seed " + std::to_string(seed) + ": " + e.what());
        }
    }
    for (auto& r : reports) {
        std::sort(r.runs.begin(), r.runs.end(), [](const RunResult& a, const RunResult& b) { return a.seed < b.seed; });
        std::vector<double> raw, norm;
        for (const auto& run : r.runs) {
            raw.push_back(run.raw_return);
            norm.push_back(run.normalized);
        }
        r.mean_return = mean_and_halfwidth(raw).first;
        std::tie(r.mean_normalized, r.halfwidth) = mean_and_halfwidth(norm);
    }
    return reports;
}

}  // namespace

ScoreReport run_experiment(const ExperimentConfig& config) { return run_all({config}).front(); }

std::string csv_header() {
    return "env,level,variant,alpha,beta_mode,seed,raw_return,normalized_score,wall_seconds\n";
}

std::string csv_rows(const ScoreReport& report) {
    const auto& c = report.config;
    std::ostringstream o;
    for (const auto& run : report.runs) {
        o << to_string(c.env) << ',' << to_string(c.level) << ',' << to_string(c.method) << ','
          << format_double(c.alpha) << ',' << (is_dice(c.method) ? to_string(c.beta_mode) : "na") << ','
          << run.seed << ',' << format_double(run.raw_return) << ',' << format_double(run.normalized) << ','
          << (c.record_timing ? format_double(run.wall_seconds) : "NA") << '\n';
    }
    return o.str();
}

std::vector<ScoreReport> alpha_sweep(const ExperimentConfig& base, const std::vector<MixLevel>& levels,
                                     const std::vector<Method>& methods, const std::vector<double>& alphas) {
    if (alphas.empty()) throw InvalidArgument("alpha sweep needs at least one alpha");
    if (levels.empty() || methods.empty()) throw InvalidArgument("alpha sweep needs levels and methods");
    std::vector<ExperimentConfig> configs;
    for (auto level : levels)
        for (auto method : methods)
            for (double alpha : alphas) {
                auto c = base;
                c.level = level;
                c.method = method;
                c.alpha = alpha;
                configs.push_back(c);
            }
    return run_all(configs);
}

std::vector<SweepRange> sweep_ranges(const std::vector<ScoreReport>& reports) {
    std::vector<SweepRange> out;
    for (const auto& r : reports) {
        auto it = std::find_if(out.begin(), out.end(), [&](const SweepRange& s) {
            return s.level == r.config.level && s.method == r.config.method;
        });
        if (it == out.end()) {
            out.push_back({r.config.level, r.config.method, r.mean_normalized, r.mean_normalized});
        } else {
            it->min_score = std::min(it->min_score, r.mean_normalized);
            it->max_score = std::max(it->max_score, r.mean_normalized);
        }
    }
    return out;
}

std::string sweep_svg(const std::vector<ScoreReport>& reports, MixLevel level) {
    constexpr double W = 640, H = 400, L = 60, R = 160, T = 40, B = 50;
    std::vector<const ScoreReport*> rows;
    for (const auto& r : reports)
        if (r.config.level == level) rows.push_back(&r);
    double amin = 1e300, amax = -1e300, smin = 0.0, smax = 100.0;
    for (const auto* r : rows) {
        amin = std::min(amin, r->config.alpha);
        amax = std::max(amax, r->config.alpha);
        smin = std::min(smin, r->mean_normalized);
        smax = std::max(smax, r->mean_normalized);
    }
    if (rows.empty()) amin = 0.0, amax = 1.0;
    if (amax == amin) amax = amin + 1.0;
    const double pad = 0.05 * (smax - smin);
    smin -= pad;
    smax += pad;
    auto px = [&](double a) { return L + (W - L - R) * (a - amin) / (amax - amin); };
    auto py = [&](double s) { return H - B - (H - T - B) * (s - smin) / (smax - smin); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">Normalized score vs alpha, level "
      << to_string(level) << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">alpha</text>\n"
      << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 " << (T + H - B) / 2
      << ")\" text-anchor=\"middle\">normalized score</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double s = smin + (smax - smin) * i / 4.0;
        const double a = amin + (amax - amin) * i / 4.0;
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(s) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << std::llround(s) << "</text>\n"
          << "<text x=\"" << px(a) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << format_double(std::round(a * 1000.0) / 1000.0) << "</text>\n";
    }
    std::vector<Method> methods;
    for (const auto* r : rows)
        if (std::find(methods.begin(), methods.end(), r->config.method) == methods.end())
            methods.push_back(r->config.method);
    for (std::size_t m = 0; m < methods.size(); ++m) {
        std::vector<const ScoreReport*> line;
        for (const auto* r : rows)
            if (r->config.method == methods[m]) line.push_back(r);
        std::sort(line.begin(), line.end(),
                  [](const ScoreReport* a, const ScoreReport* b) { return a->config.alpha < b->config.alpha; });
        const char* color = colors[m % 5];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto* r : line) o << px(r->config.alpha) << ',' << py(r->mean_normalized) << ' ';
        o << "\"/>\n";
        for (const auto* r : line)
            o << "<circle cx=\"" << px(r->config.alpha) << "\" cy=\"" << py(r->mean_normalized)
              << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        o << "<text x=\"" << W - R + 12 << "\" y=\"" << T + 20 + 18 * m << "\" font-size=\"12\" fill=\"" << color
          << "\">" << to_string(methods[m]) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace relaxdice

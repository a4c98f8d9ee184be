#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "reidfuse/amc.hpp"
#include "reidfuse/error.hpp"
#include "reidfuse/fusion.hpp"
#include "reidfuse/parallel.hpp"
#include "reidfuse/pipeline.hpp"
#include "reidfuse/simkit.hpp"
#include "reidfuse/store.hpp"

namespace reidfuse::cli {

namespace fs = std::filesystem;

std::string to_string(Command c) {
    switch (c) {
        case Command::Synth: return "synth";
        case Command::Fuse: return "fuse";
        case Command::Fit: return "fit";
        case Command::Eval: return "eval";
        case Command::Rank: return "rank";
        case Command::Bench: return "bench";
    }
    return "unknown";
}

void RunConfig::validate() const {
    auto need = [&](const std::string& value, const char* flag) {
        if (value.empty()) throw UsageError(to_string(command) + " requires " + flag);
    };
    if (k < 1) throw UsageError("--k must be >= 1");
    if (n < 1) throw UsageError("--n must be >= 1");
    if (repeats < 1) throw UsageError("--repeats must be >= 1");
    if (max_rank < 1) throw UsageError("--max-rank must be >= 1");
    if (run && *run >= repeats) throw UsageError("--run must be < --repeats");

    switch (command) {
        case Command::Synth:
            need(out, "--out");
            synth.validate();
            break;
        case Command::Fuse:
            need(gallery, "--gallery");
            need(out, "--out");
            break;
        case Command::Fit:
            need(train, "--train");
            need(out, "--out");
            break;
        case Command::Eval:
        case Command::Rank: {
            need(query, "--query");
            need(gallery, "--gallery");
            const int modes = static_cast<int>(baseline) + static_cast<int>(uffm_only) +
                              static_cast<int>(!weights_path.empty());
            if (modes != 1) {
                throw UsageError(to_string(command) + " needs exactly one of --weights, --baseline, --uffm");
            }
            if (!baseline && urf.empty()) {
                throw UsageError(to_string(command) +
                                 " with --weights or --uffm needs --urf (refined gallery features); use "
                                 "--baseline for single-view scoring");
            }
            if (command == Command::Rank) need(out, "--out");
            break;
        }
        case Command::Bench:
            need(query, "--query");
            need(gallery, "--gallery");
            break;
    }
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("command", to_string(c.command));
    auto path = [&](const char* key, const std::string& v) {
        if (!v.empty()) e.emplace_back(key, v);
    };
    switch (c.command) {
        case Command::Synth:
            e.emplace_back("num_identities", std::to_string(c.synth.num_identities));
            e.emplace_back("cams", std::to_string(c.synth.cams));
            e.emplace_back("images_per_id_per_cam", std::to_string(c.synth.images_per_id_per_cam));
            e.emplace_back("dim", std::to_string(c.synth.dim));
            e.emplace_back("identity_spread", format_double(c.synth.identity_spread));
            e.emplace_back("camera_bias_scale", format_double(c.synth.camera_bias_scale));
            e.emplace_back("noise_scale", format_double(c.synth.noise_scale));
            e.emplace_back("seed", std::to_string(c.synth.seed));
            break;
        case Command::Fuse:
            path("gallery", c.gallery);
            e.emplace_back("K", std::to_string(c.k));
            break;
        case Command::Fit:
            path("train", c.train);
            e.emplace_back("K", std::to_string(c.k));
            e.emplace_back("n", std::to_string(c.n));
            e.emplace_back("repeats", std::to_string(c.repeats));
            e.emplace_back("seed", std::to_string(c.seed));
            e.emplace_back("run", c.run ? std::to_string(*c.run) : "mean");
            break;
        case Command::Eval:
        case Command::Rank:
        case Command::Bench:
            path("query", c.query);
            path("gallery", c.gallery);
            path("urf", c.urf);
            path("weights", c.weights_path);
            e.emplace_back("mode", c.baseline ? "baseline" : c.uffm_only ? "uffm" : "weights");
            if (c.command == Command::Bench) e.emplace_back("K", std::to_string(c.k));
            if (c.command == Command::Eval) e.emplace_back("max_rank", std::to_string(c.max_rank));
            break;
    }
    return e;
}

namespace {

std::string echo_line(const RunConfig& c) {
    std::string s = "reidfuse";
    for (const auto& [k, v] : echo(c)) s += ' ' + k + '=' + v;
    return s;
}

std::string echo_block(const RunConfig& c) {
    std::string s;
    for (const auto& [k, v] : echo(c)) s += "config." + k + '=' + v + '\n';
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

FeatureSet load_prefix(const std::string& prefix, Role role) {
    return load_feature_set(prefix + ".urfb", prefix + ".csv", role);
}

void save_prefix(const FeatureSet& set, const std::string& prefix, const RunConfig& config) {
    const fs::path p(prefix);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    save_feature_set(set, prefix + ".urfb", prefix + ".csv");
    write_text(prefix + ".run.txt", echo_block(config));
}

std::vector<RefinedFeature> load_refined(const std::string& prefix, const FeatureSet& gallery) {
    const auto urf = load_prefix(prefix, Role::Gallery);
    if (urf.size() != gallery.size()) {
        throw DataError("refined features have " + std::to_string(urf.size()) + " rows, gallery has " +
                        std::to_string(gallery.size()));
    }
    if (!gallery.empty() && urf.dim() != gallery.dim()) throw DataError("refined feature dimension mismatch");
    std::vector<RefinedFeature> out;
    out.reserve(urf.size());
    for (std::size_t j = 0; j < urf.size(); ++j) {
        if (urf[j].item_id != gallery[j].item_id) {
            throw DataError("row " + std::to_string(j) + ": refined item '" + urf[j].item_id +
                            "' does not match gallery item '" + gallery[j].item_id + "'");
        }
        out.push_back({j, urf[j].feature, RefinedKind::URF, {}});
    }
    return out;
}

CombinationWeights scoring_weights(const RunConfig& c) {
    if (c.baseline) return baseline_weights();
    if (c.uffm_only) return refined_only_weights();
    return load_weights(c.weights_path);
}

std::vector<RankingResult> rank_from_config(const RunConfig& c, const FeatureSet& queries,
                                            const FeatureSet& gallery, const CombinationWeights& w) {
    const auto refined = c.baseline ? passthrough_features(gallery) : load_refined(c.urf, gallery);
    return rank_all(queries, gallery, refined, w, c.threads);
}

// --- commands ----------------------------------------------------------------

void cmd_synth(const RunConfig& c, std::ostream& out) {
    const auto data = generate(c.synth);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    save_prefix(data.train, (dir / "train").string(), c);
    save_prefix(data.queries, (dir / "query").string(), c);
    save_prefix(data.gallery, (dir / "gallery").string(), c);
    out << "train=" << data.train.size() << " query=" << data.queries.size() << " gallery=" << data.gallery.size()
        << " dim=" << data.train.dim() << '\n';
}

void cmd_fuse(const RunConfig& c, std::ostream& out) {
    const auto gallery = load_prefix(c.gallery, Role::Gallery);
    const auto refined = uffm_fuse_all(gallery, c.k, c.threads);

    std::vector<FeatureRecord> records;
    records.reserve(gallery.size());
    std::string contributors = "# " + echo_line(c) + "\ntarget_item_id,neighbor_item_id,weight\n";
    std::size_t fallbacks = 0;
    for (std::size_t j = 0; j < gallery.size(); ++j) {
        records.push_back({gallery[j].item_id, gallery[j].person_id, gallery[j].camera_id, refined[j].vector});
        fallbacks += refined[j].is_fallback();
        for (const auto& ct : refined[j].contributors) {
            contributors += gallery[j].item_id + ',' + gallery[ct.index].item_id + ',' + format_double(ct.weight) + '\n';
        }
    }
    save_prefix(FeatureSet(std::move(records), Role::Gallery), c.out, c);
    write_text(c.out + ".contributors.csv", contributors);
    out << "fused=" << gallery.size() << " fallbacks=" << fallbacks << " K=" << c.k << '\n';
}

void write_triplets(const fs::path& path, const TripletDataset& d, const RunConfig& c) {
    std::string s = "# " + echo_line(c) + " dataset_seed=" + std::to_string(d.seed) + '\n';
    s += "s_single,s_refined,cce,label\n";
    for (const auto& r : d.rows) {
        s += format_double(r.s_single) + ',' + format_double(r.s_refined) + ',' + std::to_string(r.cce) + ',' +
             std::to_string(r.label) + '\n';
    }
    write_text(path, s);
}

void cmd_fit(const RunConfig& c, std::ostream& out) {
    const auto train = load_prefix(c.train, Role::Train);
    const auto fit = fit_weights_repeated(train, c.n, c.k, c.seed, c.repeats, c.threads);
    const CombinationWeights chosen = c.run ? fit.runs[*c.run] : fit.mean;

    std::string text;
    for (const auto& [k, v] : echo(c)) text += "# config." + k + '=' + v + '\n';
    for (const auto& w : fit.runs) {
        text += "# run." + std::to_string(w.run_index) + " alpha=" + format_double(w.alpha) +
                " beta=" + format_double(w.beta) + " gamma=" + format_double(w.gamma) +
                " intercept=" + format_double(w.intercept) + '\n';
    }
    text += "# stddev alpha=" + format_double(fit.stddev.alpha) + " beta=" + format_double(fit.stddev.beta) +
            " gamma=" + format_double(fit.stddev.gamma) + " intercept=" + format_double(fit.stddev.intercept) + '\n';
    text += format_weights(chosen);
    write_text(c.out, text);

    if (!c.dump.empty()) {
        const std::uint64_t dump_seed = c.seed + (c.run ? *c.run : 0);
        write_triplets(c.dump, build_triplet_dataset(train, c.n, c.k, dump_seed), c);
    }
    out << "alpha=" << format_double(chosen.alpha) << " beta=" << format_double(chosen.beta)
        << " gamma=" << format_double(chosen.gamma) << " intercept=" << format_double(chosen.intercept)
        << " ridge_fallback=" << (chosen.ridge_fallback ? 1 : 0) << '\n';
}

void cmd_eval(const RunConfig& c, std::ostream& out) {
    const auto queries = load_prefix(c.query, Role::Query);
    const auto gallery = load_prefix(c.gallery, Role::Gallery);
    const auto w = scoring_weights(c);
    const auto rankings = rank_from_config(c, queries, gallery, w);

    auto report = evaluate(rankings, queries, gallery, c.max_rank);
    report.config_echo = echo(c);
    report.config_echo.emplace_back("alpha", format_double(w.alpha));
    report.config_echo.emplace_back("beta", format_double(w.beta));
    report.config_echo.emplace_back("gamma", format_double(w.gamma));
    report.config_echo.emplace_back("weights_k_used", std::to_string(w.k_used));
    report.config_echo.emplace_back("weights_n_used", std::to_string(w.n_used));
    report.config_echo.emplace_back("weights_seed", std::to_string(w.seed));
    report.config_echo.emplace_back("weights_run_index", std::to_string(w.run_index));

    const std::string text = format_report(report, queries);
    if (c.out.empty()) {
        out << text;
    } else {
        write_text(c.out, text);
        out << "rank1=" << format_double(report.rank1()) << " mAP=" << format_double(report.map) << '\n';
    }
    if (!c.rank_list.empty()) write_text(c.rank_list, format_rank_list(rankings, queries, gallery, echo_line(c)));
}

void cmd_rank(const RunConfig& c, std::ostream& out) {
    const auto queries = load_prefix(c.query, Role::Query);
    const auto gallery = load_prefix(c.gallery, Role::Gallery);
    const auto rankings = rank_from_config(c, queries, gallery, scoring_weights(c));
    write_text(c.out, format_rank_list(rankings, queries, gallery, echo_line(c)));
    out << "queries=" << queries.size() << " gallery=" << gallery.size() << '\n';
}

void cmd_bench(const RunConfig& c, std::ostream& out) {
    const auto queries = load_prefix(c.query, Role::Query);
    const auto gallery = load_prefix(c.gallery, Role::Gallery);
    CombinationWeights w;
    w.alpha = 0.5;
    w.beta = 0.5;
    w.gamma = 0.0;
    if (!c.weights_path.empty()) w = load_weights(c.weights_path);

    using clock = std::chrono::steady_clock;
    auto time_stage = [&](const char* name, const std::function<void()>& stage) {
        double best = 1e300;
        double total = 0.0;
        for (std::size_t r = 0; r < c.repeats; ++r) {
            const auto t0 = clock::now();
            stage();
            const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            best = std::min(best, ms);
            total += ms;
        }
        out << name << ".min_ms=" << best << ' ' << name << ".mean_ms=" << total / static_cast<double>(c.repeats)
            << '\n';
    };

    std::vector<RefinedFeature> refined;
    std::vector<RankingResult> rankings;
    out << "queries=" << queries.size() << " gallery=" << gallery.size() << " dim=" << gallery.dim()
        << " K=" << c.k << " threads=" << (c.threads ? c.threads : default_thread_count()) << '\n';
    time_stage("similarity_matrix", [&] { (void)similarity_matrix(queries, gallery, c.threads); });
    time_stage("uffm_fuse_all", [&] { refined = uffm_fuse_all(gallery, c.k, c.threads); });
    time_stage("rank_all", [&] { rankings = rank_all(queries, gallery, refined, w, c.threads); });
    time_stage("evaluate", [&] { (void)evaluate(rankings, queries, gallery, c.max_rank); });
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
    RunConfig c;
    CLI::App app{"Multi-view feature fusion and learned similarity combination for person re-identification"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--threads", c.threads, "Worker threads (0 = REIDFUSE_THREADS or hardware concurrency)");
    };
    auto add_eval_inputs = [&](CLI::App* sub) {
        sub->add_option("--query", c.query, "Query feature set prefix");
        sub->add_option("--gallery", c.gallery, "Gallery feature set prefix");
        sub->add_option("--urf", c.urf, "Refined gallery feature prefix (output of `fuse`)");
        sub->add_option("--weights", c.weights_path, "Weights file from `fit`");
        sub->add_flag("--baseline", c.baseline, "Score with single-view cosine only");
        sub->add_flag("--uffm", c.uffm_only, "Score with refined-feature cosine only");
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic train/query/gallery split");
    synth->add_option("--out", c.out, "Output directory");
    synth->add_option("--ids", c.synth.num_identities, "Number of identities");
    synth->add_option("--cams", c.synth.cams, "Number of cameras");
    synth->add_option("--imgs", c.synth.images_per_id_per_cam, "Images per identity per camera");
    synth->add_option("--dim", c.synth.dim, "Embedding dimension");
    synth->add_option("--spread", c.synth.identity_spread, "Identity centre std (per component)");
    synth->add_option("--bias", c.synth.camera_bias_scale, "Camera offset RMS (per component)");
    synth->add_option("--noise", c.synth.noise_scale, "Per-image noise std (per component)");
    synth->add_option("--seed", c.synth.seed, "Generator seed");
    add_common(synth);

    auto* fuse = app.add_subcommand("fuse", "Build refined gallery features by cross-camera neighbor fusion");
    fuse->add_option("--gallery", c.gallery, "Gallery feature set prefix");
    fuse->add_option("--k", c.k, "Neighbors per gallery item");
    fuse->add_option("--out", c.out, "Output prefix");
    add_common(fuse);

    auto* fit = app.add_subcommand("fit", "Learn combination weights from a labelled train set");
    fit->add_option("--train", c.train, "Train feature set prefix");
    fit->add_option("--k", c.k, "Neighbors for label-guided fusion");
    fit->add_option("--n", c.n, "Triplets per repeat");
    fit->add_option("--repeats", c.repeats, "Independent repeats (seeds seed..seed+repeats-1)");
    fit->add_option("--seed", c.seed, "Base seed");
    fit->add_option("--run", c.run, "Emit this repeat's weights instead of the mean");
    fit->add_option("--out", c.out, "Weights file");
    fit->add_option("--dump", c.dump, "Optional triplet dataset CSV");
    add_common(fit);

    auto* eval = app.add_subcommand("eval", "Rank and evaluate with CMC and mAP");
    add_eval_inputs(eval);
    eval->add_option("--max-rank", c.max_rank, "Longest CMC rank reported");
    eval->add_option("--out", c.out, "Report file (stdout when omitted)");
    eval->add_option("--rank-list", c.rank_list, "Optional rank list CSV");
    add_common(eval);

    auto* rank = app.add_subcommand("rank", "Write the ranked gallery for every query");
    add_eval_inputs(rank);
    rank->add_option("--out", c.out, "Rank list CSV");
    add_common(rank);

    auto* bench = app.add_subcommand("bench", "Time the scoring stages");
    add_eval_inputs(bench);
    bench->add_option("--k", c.k, "Neighbors per gallery item");
    bench->add_option("--repeats", c.repeats, "Timing repetitions per stage");
    bench->add_option("--max-rank", c.max_rank, "Longest CMC rank");
    add_common(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (synth->parsed()) c.command = Command::Synth;
    else if (fuse->parsed()) c.command = Command::Fuse;
    else if (fit->parsed()) c.command = Command::Fit;
    else if (eval->parsed()) c.command = Command::Eval;
    else if (rank->parsed()) c.command = Command::Rank;
    else c.command = Command::Bench;

    if (c.command == Command::Bench && c.baseline + c.uffm_only + !c.weights_path.empty() > 1) {
        throw UsageError("bench accepts at most one of --weights, --baseline, --uffm");
    }
    c.validate();
    return c;
}

void run(const RunConfig& config, std::ostream& out) {
    config.validate();
    switch (config.command) {
        case Command::Synth: cmd_synth(config, out); break;
        case Command::Fuse: cmd_fuse(config, out); break;
        case Command::Fit: cmd_fit(config, out); break;
        case Command::Eval: cmd_eval(config, out); break;
        case Command::Rank: cmd_rank(config, out); break;
        case Command::Bench: cmd_bench(config, out); break;
    }
}

namespace {

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Data: return "data";
        case ErrorKind::Invariant: return "internal";
    }
    return "internal";
}

}  // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    ErrorKind kind = ErrorKind::Invariant;
    std::string message;
    try {
        const auto config = parse_args(argc, argv, out);
        if (config) run(*config, out);
        return 0;
    } catch (const Error& e) {
        kind = e.kind();
        message = e.what();
    } catch (const fs::filesystem_error& e) {
        kind = ErrorKind::Data;
        message = e.what();
    } catch (const std::exception& e) {
        message = e.what();
    }
    err << "reidfuse: error code=" << static_cast<int>(kind) << " kind=" << kind_name(kind)
        << " msg=" << one_line(message) << '\n';
    return static_cast<int>(kind);
}

}  // namespace reidfuse::cli

// Command-line front end: split, gen-neg, score, evaluate, cn-dist.
//
// Exit codes: 0 ok, 2 usage/config, 3 data/coverage, 4 internal.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heart/heart.hpp"

namespace fs = std::filesystem;
using namespace heart;

namespace {

struct GraphArgs {
    std::string split_path;
    std::string features_path;
    std::string stage = "test";
    bool include_valid = false;
    bool dynamic = false;
    NodeId num_nodes = 0;
    unsigned threads = 0;
};

void add_graph_options(CLI::App* cmd, GraphArgs& a) {
    cmd->add_option("--split", a.split_path, "Split file (#train/#valid/#test)")->required();
    cmd->add_option("--features", a.features_path, "Node feature CSV");
    cmd->add_option("--stage", a.stage, "Evaluation stage")->check(CLI::IsMember({"valid", "test"}));
    cmd->add_flag("--include-valid", a.include_valid, "Add validation edges to the graph when evaluating test");
    cmd->add_flag("--dynamic", a.dynamic, "Dynamic graph: do not filter earlier positives from negatives");
    cmd->add_option("--num-nodes", a.num_nodes, "Node count (default: inferred)");
    cmd->add_option("--threads", a.threads, "Worker threads (default: HEART_THREADS or logical cores)");
}

Stage parse_stage(const std::string& s) { return s == "valid" ? Stage::Valid : Stage::Test; }

struct Loaded {
    EdgeSplit split;
    std::optional<FeatureMatrix> features;
    NodeId num_nodes = 0;
    Stage stage = Stage::Test;
    Graph graph;
};

Loaded load_inputs(const GraphArgs& a, const NegativeSet* negatives = nullptr) {
    Loaded in;
    in.split = load_split(a.split_path);
    if (a.dynamic) in.split.dynamic = true;
    in.stage = parse_stage(a.stage);
    if (!a.features_path.empty()) in.features = load_features(a.features_path);

    NodeId inferred = in.split.min_num_nodes();
    if (in.features) inferred = std::max<NodeId>(inferred, static_cast<NodeId>(in.features->num_nodes()));
    if (negatives) {
        for (const auto& e : negatives->positives) inferred = std::max(inferred, std::max(e.u, e.v) + 1);
        for (const auto& e : all_negatives(*negatives)) inferred = std::max(inferred, std::max(e.u, e.v) + 1);
    }
    if (a.num_nodes > 0 && a.num_nodes < inferred)
        throw Error(ErrorKind::Range, "--num-nodes " + std::to_string(a.num_nodes) + " is below the largest node id");
    in.num_nodes = a.num_nodes > 0 ? a.num_nodes : inferred;
    if (in.features && in.features->num_nodes() != in.num_nodes)
        throw Error(ErrorKind::Validation, "feature rows (" + std::to_string(in.features->num_nodes()) +
                                               ") do not match node count (" + std::to_string(in.num_nodes) + ")");
    in.split.validate(in.num_nodes);

    bool with_valid = a.include_valid;
    if (with_valid && in.stage == Stage::Valid) {
        log::warn("--include-valid ignored for the valid stage");
        with_valid = false;
    }
    in.graph = training_graph(in.split, with_valid, in.num_nodes);
    return in;
}

FilterPolicy policy_for(const Loaded& in) {
    FilterPolicy p;
    p.dynamic_mode = in.split.dynamic;
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Validation, "cannot write " + path);
    out << text;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct HeuristicParams {
    double beta = 0.05;
    std::uint32_t max_len = 5;
    double alpha = 0.15;
    double epsilon = 1e-5;
    std::uint32_t cutoff = 6;
    std::string direction = "first";
};

void add_heuristic_params(CLI::App* cmd, HeuristicParams& p) {
    cmd->add_option("--beta", p.beta, "Katz decay");
    cmd->add_option("--max-len", p.max_len, "Katz walk length");
    cmd->add_option("--alpha", p.alpha, "PPR restart probability");
    cmd->add_option("--epsilon", p.epsilon, "PPR push tolerance");
    cmd->add_option("--cutoff", p.cutoff, "Shortest-path BFS cutoff");
    cmd->add_option("--ppr-direction", p.direction, "PPR seed: first (fixed endpoint) or second")
        ->check(CLI::IsMember({"first", "second"}));
}

HeuristicKind make_kind(Heuristic tag, const HeuristicParams& p) {
    HeuristicKind k;
    k.tag = tag;
    k.beta = p.beta;
    k.max_len = p.max_len;
    k.alpha = p.alpha;
    k.epsilon = p.epsilon;
    k.cutoff = p.cutoff;
    k.direction = p.direction == "second" ? PprDirection::FromSecond : PprDirection::FromFirst;
    k.validate();
    return k;
}

// ---------------------------------------------------------------------------

struct SplitArgs {
    std::string edges;
    std::vector<double> ratios{0.85, 0.05, 0.10};
    std::uint64_t seed = 0;
    bool dynamic = false;
    std::string out;
};

int run_split(const SplitArgs& a) {
    EdgeList raw = read_edges(a.edges);
    // Normalize to unordered pairs; a dynamic split keeps one copy per
    // (pair, year) so repeated collaborations survive.
    EdgeList edges;
    std::set<std::pair<std::uint64_t, std::int64_t>> seen;
    std::size_t loops = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const Edge e = canonical(raw.edges[i]);
        if (e.u == e.v) {
            ++loops;
            continue;
        }
        const std::int64_t year = a.dynamic && raw.timed() ? raw.years[i] : 0;
        if (!seen.insert({pair_key(e.u, e.v), year}).second) continue;
        edges.edges.push_back(e);
        if (raw.timed()) edges.years.push_back(raw.years[i]);
    }
    if (loops > 0) log::warn("dropped " + std::to_string(loops) + " self-loops");
    EdgeSplit split = make_split(edges, {a.ratios[0], a.ratios[1], a.ratios[2]}, a.seed);
    split.dynamic = a.dynamic;
    save_split(a.out, split);
    return 0;
}

struct GenNegArgs {
    GraphArgs graph;
    HeuristicParams params;
    std::string mode = "heart";
    std::size_t k = 500;
    std::string count = "auto";
    std::string heuristics = "auto";
    std::uint64_t seed = 0;
    std::size_t subsample = 0;
    std::string out;
};

std::vector<HeuristicKind> parse_heuristic_list(const std::string& list, const HeuristicParams& p, bool have_features) {
    if (list == "auto") return default_heart_heuristics(have_features);
    std::vector<HeuristicKind> out;
    for (const auto& item : split_commas(list)) out.push_back(make_kind(parse_heuristic(item), p));
    if (out.empty()) throw Error(ErrorKind::Config, "heart mode needs at least one heuristic");
    return out;
}

int run_gen_neg(const GenNegArgs& a) {
    const auto mode = parse_negative_mode(a.mode);
    if (mode == NegativeMode::Heart && a.k % 2 != 0)
        throw Error(ErrorKind::Config, "heart mode needs an even --k, got " + std::to_string(a.k));
    const Loaded in = load_inputs(a.graph);
    const unsigned workers = resolve_workers(a.graph.threads);
    const FilterIndex index(in.split, in.num_nodes);
    auto positives = stage_edges(in.split, in.stage).edges;
    if (a.subsample > 0) positives = subsample_positives(positives, a.subsample, a.seed);
    if (positives.empty()) throw Error(ErrorKind::Validation, "no positives in the selected stage");

    NegativeSet set;
    switch (mode) {
        case NegativeMode::Heart: {
            HeartConfig cfg;
            cfg.k = a.k;
            cfg.heuristics = parse_heuristic_list(a.heuristics, a.params, in.features.has_value());
            cfg.policy = policy_for(in);
            cfg.seed = a.seed;
            cfg.workers = workers;
            set = generate_heart(in.graph, in.features ? &*in.features : nullptr, index, positives, in.stage, cfg);
            break;
        }
        case NegativeMode::Global: {
            std::size_t count = positives.size();
            if (a.count != "auto") {
                try {
                    count = std::stoull(a.count);
                } catch (...) {
                    throw Error(ErrorKind::Config, "--count must be 'auto' or a positive integer");
                }
            }
            set = generate_global_random(index, positives, in.stage, count, policy_for(in), a.seed);
            break;
        }
        case NegativeMode::PerPositiveRandom:
            set = generate_per_positive_random(index, positives, in.stage, a.k, policy_for(in), a.seed, workers);
            break;
    }
    save_negative_set(a.out, set);
    return 0;
}

struct ScoreArgs {
    GraphArgs graph;
    HeuristicParams params;
    std::string negatives;
    std::string heuristic;
    std::string out_pos;
    std::string out_neg;
};

int run_score(const ScoreArgs& a) {
    const auto kind = make_kind(parse_heuristic(a.heuristic), a.params);
    if (kind.tag == Heuristic::FeatureCosine && a.graph.features_path.empty())
        throw Error(ErrorKind::Config, "--heuristic cos requires --features");
    const NegativeSet negs = load_negative_set(a.negatives);
    const Loaded in = load_inputs(a.graph, &negs);
    const unsigned workers = resolve_workers(a.graph.threads);
    const FeatureMatrix* x = in.features ? &*in.features : nullptr;
    save_score_table(a.out_pos, score_pairs(in.graph, x, kind, negs.positives, workers));
    save_score_table(a.out_neg, score_pairs(in.graph, x, kind, all_negatives(negs), workers));
    return 0;
}

struct EvalArgs {
    std::string negatives;
    std::vector<std::string> pos_scores;
    std::vector<std::string> neg_scores;
    std::string ks = "1,3,10,100";
    std::string tie = "mid";
    std::string out;
};

int run_evaluate(const EvalArgs& a) {
    if (a.pos_scores.size() != a.neg_scores.size())
        throw Error(ErrorKind::Config, "need one --neg-scores file per --pos-scores file");
    std::vector<std::size_t> ks;
    for (const auto& item : split_commas(a.ks)) {
        std::size_t k = 0;
        if (!detail::parse_int(std::string_view(item), k) || k == 0)
            throw Error(ErrorKind::Config, "bad K '" + item + "' in --ks");
        ks.push_back(k);
    }
    const auto tie = parse_tie_policy(a.tie);
    const NegativeSet negs = load_negative_set(a.negatives);
    std::vector<MetricReport> runs;
    for (std::size_t i = 0; i < a.pos_scores.size(); ++i) {
        runs.push_back(evaluate(negs, load_score_table(a.pos_scores[i]), load_score_table(a.neg_scores[i]), ks, tie));
    }
    const auto report = aggregate_seeds(runs);
    if (a.out.empty() || a.out == "-") std::cout << format_report(report);
    else save_report(a.out, report);
    return 0;
}

struct CnDistArgs {
    GraphArgs graph;
    std::string negatives;
    bool log_bins = false;
    std::string out;
};

int run_cn_dist(const CnDistArgs& a) {
    const NegativeSet negs = load_negative_set(a.negatives);
    const Loaded in = load_inputs(a.graph, &negs);
    const auto text = format_cn_histogram(cn_distribution(in.graph, negs, a.log_bins));
    if (a.out.empty() || a.out == "-") std::cout << text;
    else write_text(a.out, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HeaRT link-prediction evaluation toolkit"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress warnings");

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "Seeded train/valid/test split of an edge list");
    split_cmd->add_option("--edges", split_args.edges, "Edge list file")->required();
    split_cmd->add_option("--ratios", split_args.ratios, "Train, valid, test fractions")->expected(3);
    split_cmd->add_option("--seed", split_args.seed, "Shuffle seed");
    split_cmd->add_flag("--dynamic", split_args.dynamic, "Keep repeated pairs with distinct timestamps");
    split_cmd->add_option("--out", split_args.out, "Output split file")->required();

    GenNegArgs gen_args;
    auto* gen_cmd = app.add_subcommand("gen-neg", "Generate evaluation negatives");
    add_graph_options(gen_cmd, gen_args.graph);
    add_heuristic_params(gen_cmd, gen_args.params);
    gen_cmd->add_option("--mode", gen_args.mode, "heart | global | per_positive_random")
        ->check(CLI::IsMember({"heart", "global", "per_positive_random"}));
    gen_cmd->add_option("--k", gen_args.k, "Negatives per positive");
    gen_cmd->add_option("--count", gen_args.count, "Shared list size in global mode, or 'auto' (= #positives)");
    gen_cmd->add_option("--heuristics", gen_args.heuristics, "Comma list (ra,ppr,cos,...) or 'auto'");
    gen_cmd->add_option("--seed", gen_args.seed, "Seed");
    gen_cmd->add_option("--subsample", gen_args.subsample, "Use N positives drawn uniformly without replacement");
    gen_cmd->add_option("--out", gen_args.out, "Output negative set file")->required();

    ScoreArgs score_args;
    auto* score_cmd = app.add_subcommand("score", "Score positives and negatives with a heuristic");
    add_graph_options(score_cmd, score_args.graph);
    add_heuristic_params(score_cmd, score_args.params);
    score_cmd->add_option("--negatives", score_args.negatives, "Negative set file")->required();
    score_cmd->add_option("--heuristic", score_args.heuristic, "cn | aa | ra | sp | katz | ppr | cos")->required();
    score_cmd->add_option("--out-pos", score_args.out_pos, "Positive score table")->required();
    score_cmd->add_option("--out-neg", score_args.out_neg, "Negative score table")->required();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "MRR / Hits@K / AUC from score tables");
    eval_cmd->add_option("--negatives", eval_args.negatives, "Negative set file")->required();
    eval_cmd->add_option("--pos-scores", eval_args.pos_scores, "Positive score tables, one per seed")->required();
    eval_cmd->add_option("--neg-scores", eval_args.neg_scores, "Negative score tables, one per seed")->required();
    eval_cmd->add_option("--ks", eval_args.ks, "Hits@K cutoffs, comma separated");
    eval_cmd->add_option("--tie", eval_args.tie, "mid | optimistic | pessimistic")
        ->check(CLI::IsMember({"mid", "optimistic", "pessimistic"}));
    eval_cmd->add_option("--out", eval_args.out, "Report file (default stdout)");

    CnDistArgs cn_args;
    auto* cn_cmd = app.add_subcommand("cn-dist", "Common-neighbor histogram of positives vs negatives");
    add_graph_options(cn_cmd, cn_args.graph);
    cn_cmd->add_option("--negatives", cn_args.negatives, "Negative set file")->required();
    cn_cmd->add_flag("--log-bins", cn_args.log_bins, "Bins 0, 1, 2-3, 4-7, ...");
    cn_cmd->add_option("--out", cn_args.out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    log::quiet() = quiet;

    try {
        if (split_cmd->parsed()) return run_split(split_args);
        if (gen_cmd->parsed()) return run_gen_neg(gen_args);
        if (score_cmd->parsed()) return run_score(score_args);
        if (eval_cmd->parsed()) return run_evaluate(eval_args);
        if (cn_cmd->parsed()) return run_cn_dist(cn_args);
    } catch (const Error& e) {
        std::cerr << "heart: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "heart: internal error: " << e.what() << '\n';
        return 4;
    }
    return 4;
}

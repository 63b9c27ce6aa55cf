#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spanagree/corpus_io.hpp"
#include "spanagree/metrics.hpp"
#include "spanagree/model.hpp"
#include "spanagree/synth.hpp"

namespace {

using namespace spanagree;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIngest = 3;
constexpr int kExitNoData = 4;

struct CommonOpts {
    std::string corpus_path;
    std::string criterion = "all";
    std::string label = "all";
    std::string output;  // empty = stdout
    std::string format = "csv";
    std::string empty_pair = "one";
    std::string recall = "bounded";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write temp then rename, so a failed run never leaves a partial report.
void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty()) {
        std::cout << bytes;
        std::cout.flush();
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << bytes;
        if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::vector<Criterion> selected_criteria(const std::string& s) {
    if (s == "all")
        return {Criterion::Exact, Criterion::OneSideBoundary,
                Criterion::TokenOverlap};
    const auto c = parse_criterion(s);
    if (!c) throw CLI::ValidationError("--criterion", "must be exact|ob|to|all");
    return {*c};
}

std::vector<Label> selected_labels(const std::string& s) {
    if (s == "all") return {Label::P, Label::I, Label::O};
    const auto l = parse_label(s);
    if (!l) throw CLI::ValidationError("--label", "must be P|I|O|all");
    return {*l};
}

Conventions conventions_from(const CommonOpts& opts) {
    Conventions conv;
    if (opts.empty_pair == "one") conv.empty_pair = EmptyPairRule::One;
    else if (opts.empty_pair == "zero") conv.empty_pair = EmptyPairRule::Zero;
    else if (opts.empty_pair == "skip") conv.empty_pair = EmptyPairRule::Skip;
    else throw CLI::ValidationError("--empty-pair", "must be one|zero|skip");
    if (opts.recall == "bounded") conv.recall = RecallMode::Bounded;
    else if (opts.recall == "prediction-count")
        conv.recall = RecallMode::PredictionCount;
    else
        throw CLI::ValidationError("--recall",
                                   "must be bounded|prediction-count");
    return conv;
}

ReportFormat format_from(const CommonOpts& opts) {
    if (opts.format == "csv") return ReportFormat::Csv;
    if (opts.format == "json") return ReportFormat::Json;
    throw CLI::ValidationError("--format", "must be json|csv");
}

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool needs_corpus) {
    auto* corpus =
        cmd->add_option("--corpus", opts.corpus_path, "corpus JSONL path");
    if (needs_corpus) corpus->required();
    cmd->add_option("--criterion", opts.criterion, "exact|ob|to|all")
        ->check(CLI::IsMember({"exact", "ob", "to", "all"}));
    cmd->add_option("--label", opts.label, "P|I|O|all")
        ->check(CLI::IsMember({"P", "I", "O", "all"}));
    cmd->add_option("--output", opts.output, "output path (default stdout)");
    cmd->add_option("--format", opts.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--empty-pair", opts.empty_pair, "one|zero|skip")
        ->check(CLI::IsMember({"one", "zero", "skip"}));
    cmd->add_option("--recall", opts.recall, "bounded|prediction-count")
        ->check(CLI::IsMember({"bounded", "prediction-count"}));
}

Corpus load_corpus(const std::string& path, ReportTable& table) {
    const std::string bytes = read_file(path);
    table.metadata["corpus_hash"] = fnv1a_hex(bytes);
    std::istringstream in(bytes);
    return parse_corpus(in);
}

void stamp_flags(ReportTable& table, const CommonOpts& opts) {
    table.metadata["criterion"] = opts.criterion;
    table.metadata["label"] = opts.label;
    table.metadata["empty_pair"] = opts.empty_pair;
    table.metadata["recall"] = opts.recall;
}

int run_agree(const CommonOpts& opts, const std::string& group,
              const std::string& gold_group, const std::string& pred_group) {
    ReportTable table;
    stamp_flags(table, opts);
    const Corpus corpus = load_corpus(opts.corpus_path, table);
    const Conventions conv = conventions_from(opts);
    const auto criteria = selected_criteria(opts.criterion);
    const auto labels = selected_labels(opts.label);
    int skipped = 0;

    if (!group.empty()) {
        const auto g = parse_group(group);
        if (!g) throw CLI::ValidationError("--group", "must be expert|crowd");
        table.metadata["cohort"] = group;
        for (Criterion c : criteria) {
            for (Label l : labels) {
                try {
                    const auto stat =
                        within_group_agreement(corpus, *g, c, l, conv);
                    table.rows.push_back({group, label_name(l),
                                          criterion_name(c), "f1", stat.mean,
                                          stat.std, stat.n});
                } catch (const NoQualifyingDocuments& e) {
                    std::cerr << "warning: " << label_name(l) << "/"
                              << criterion_name(c) << ": " << e.what() << "\n";
                    ++skipped;
                }
            }
        }
    } else {
        const auto gg = parse_group(gold_group);
        const auto pg = parse_group(pred_group);
        if (!gg || !pg)
            throw CLI::ValidationError("--gold-group/--pred-group",
                                       "must be expert|crowd");
        const std::string cohort = gold_group + "-vs-" + pred_group;
        table.metadata["cohort"] = cohort;
        for (Criterion c : criteria) {
            for (Label l : labels) {
                try {
                    const auto r =
                        cross_group_agreement(corpus, *gg, *pg, c, l, conv);
                    table.rows.push_back({cohort, label_name(l),
                                          criterion_name(c), "precision",
                                          r.precision.mean, r.precision.std,
                                          r.precision.n});
                    table.rows.push_back({cohort, label_name(l),
                                          criterion_name(c), "recall",
                                          r.recall.mean, r.recall.std,
                                          r.recall.n});
                    table.rows.push_back({cohort, label_name(l),
                                          criterion_name(c), "f1", r.f1.mean,
                                          r.f1.std, r.f1.n});
                } catch (const NoQualifyingDocuments& e) {
                    std::cerr << "warning: " << label_name(l) << "/"
                              << criterion_name(c) << ": " << e.what() << "\n";
                    ++skipped;
                }
            }
        }
    }
    if (table.rows.empty()) {
        std::cerr << "error: no qualifying data for any requested row\n";
        return kExitNoData;
    }
    write_output(opts.output, emit_report(table, format_from(opts)));
    return kExitOk;
}

int run_eval(const CommonOpts& opts, const std::string& predictions_path,
             const std::string& gold_annotator) {
    ReportTable table;
    stamp_flags(table, opts);
    const Corpus corpus = load_corpus(opts.corpus_path, table);
    const Conventions conv = conventions_from(opts);
    const std::string gold_name =
        gold_annotator.empty() ? "aggregated" : gold_annotator;
    table.metadata["gold_annotator"] = gold_name;

    std::map<std::string, std::vector<Span>> gold;
    std::map<std::string, int> token_counts;
    for (const auto& doc : corpus) {
        const auto* set = doc.find_set(gold_name);
        if (!set) throw MissingGold(doc.doc_id);
        gold[doc.doc_id] = set->spans;
        token_counts[doc.doc_id] = doc.token_count();
    }

    std::istringstream pred_in(read_file(predictions_path));
    const auto predicted = parse_predictions(pred_in);
    for (const auto& [doc_id, spans] : predicted) {
        const auto it = token_counts.find(doc_id);
        if (it == token_counts.end()) throw UnknownDocument(doc_id);
        for (const auto& s : spans)
            if (s.end > it->second)
                throw ValidationError(doc_id,
                                      "predicted span ends past token " +
                                          std::to_string(it->second));
    }

    for (Criterion c : selected_criteria(opts.criterion)) {
        const auto result = evaluate_predictions(gold, predicted, c, conv.recall);
        auto push = [&](const std::string& label, const ScoreTriple& t,
                        long n) {
            table.rows.push_back({"eval", label, criterion_name(c), "precision",
                                  t.precision, 0.0, n});
            table.rows.push_back(
                {"eval", label, criterion_name(c), "recall", t.recall, 0.0, n});
            table.rows.push_back(
                {"eval", label, criterion_name(c), "f1", t.f1, 0.0, n});
        };
        for (Label l : selected_labels(opts.label))
            push(label_name(l), result.per_label.at(l), result.n_documents);
        if (opts.label == "all")
            push("micro", result.micro, result.n_documents);
    }
    write_output(opts.output, emit_report(table, format_from(opts)));
    return kExitOk;
}

int run_stats(const CommonOpts& opts, const std::string& group) {
    ReportTable table;
    stamp_flags(table, opts);
    const Corpus corpus = load_corpus(opts.corpus_path, table);
    std::vector<Group> groups;
    if (group.empty() || group == "all")
        groups = {Group::Expert, Group::Crowd};
    else {
        const auto g = parse_group(group);
        if (!g) throw CLI::ValidationError("--group", "must be expert|crowd");
        groups = {*g};
    }
    for (Group g : groups) {
        for (Label l : selected_labels(opts.label)) {
            try {
                const auto stat = span_length_stats(corpus, g, l);
                table.rows.push_back({group_name(g), label_name(l), "-",
                                      "length", stat.mean, stat.std, stat.n});
            } catch (const NoSpans& e) {
                std::cerr << "warning: " << e.what() << "\n";
            }
        }
    }
    if (table.rows.empty()) {
        std::cerr << "error: no spans for any requested group/label\n";
        return kExitNoData;
    }
    write_output(opts.output, emit_report(table, format_from(opts)));
    return kExitOk;
}

int run_convert(const CommonOpts& opts) {
    ReportTable table;
    const Corpus corpus = load_corpus(opts.corpus_path, table);
    int merges = 0;
    for (const auto& doc : corpus) {
        for (const auto& set : doc.annotation_sets) {
            // Adjacent same-label spans collapse into one run in token form.
            merges += token_labels_from_spans(set.spans, doc.token_count())
                          .merged_adjacent;
        }
    }
    std::cerr << "merge warnings: " << merges << "\n";
    write_output(opts.output, write_corpus_spanform(corpus));
    return kExitOk;
}

int run_synth(const CommonOpts& opts, std::uint64_t seed, int docs,
              int annotators, int experts, double jitter, int max_shift,
              double drop) {
    if (annotators < 1)
        throw CLI::ValidationError("--annotators", "must be >= 1");
    if (experts < 0 || experts > annotators)
        throw CLI::ValidationError("--experts", "must be in [0, annotators]");
    JitterParams params;
    params.seed = seed;
    params.jitter_prob = jitter;
    params.max_shift = max_shift;
    params.drop_prob = drop;
    std::vector<Group> groups;
    for (int a = 0; a < annotators; ++a)
        groups.push_back(a < experts ? Group::Expert : Group::Crowd);
    const Corpus corpus = generate(params, docs, groups);
    write_output(opts.output, write_corpus_spanform(corpus));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Span-level annotation agreement and evaluation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* agree = app.add_subcommand(
        "agree", "within-group or cross-group annotator agreement");
    std::string group, gold_group, pred_group;
    add_common_flags(agree, opts, true);
    auto* group_opt = agree->add_option("--group", group, "within-group cohort");
    auto* gold_opt =
        agree->add_option("--gold-group", gold_group, "cross: gold cohort");
    auto* pred_opt =
        agree->add_option("--pred-group", pred_group, "cross: predicted cohort");
    group_opt->excludes(gold_opt)->excludes(pred_opt);
    gold_opt->needs(pred_opt);
    pred_opt->needs(gold_opt);

    auto* eval =
        app.add_subcommand("eval", "evaluate predicted spans against gold");
    std::string predictions_path, gold_annotator;
    add_common_flags(eval, opts, true);
    eval->add_option("--predictions", predictions_path, "predictions JSONL")
        ->required();
    eval->add_option("--gold-annotator", gold_annotator,
                     "gold annotator id (default: 'aggregated')");

    auto* stats = app.add_subcommand("stats", "span length statistics");
    std::string stats_group;
    add_common_flags(stats, opts, true);
    stats->add_option("--group", stats_group, "expert|crowd|all");

    auto* convert =
        app.add_subcommand("convert", "token-form corpus to span-form");
    add_common_flags(convert, opts, true);

    auto* synth = app.add_subcommand("synth", "deterministic synthetic corpus");
    std::uint64_t seed = 0;
    int docs = 10, annotators = 3, experts = 0, max_shift = 2;
    double jitter = 0.5, drop = 0.0;
    add_common_flags(synth, opts, false);
    synth->add_option("--seed", seed, "RNG seed")->required();
    synth->add_option("--docs", docs, "document count");
    synth->add_option("--annotators", annotators, "annotators per document");
    synth->add_option("--experts", experts,
                      "how many annotators form the expert group");
    synth->add_option("--jitter", jitter, "boundary shift probability")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--max-shift", max_shift, "max boundary shift in tokens");
    synth->add_option("--drop", drop, "span drop probability")
        ->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (agree->parsed()) {
            if (group.empty() && gold_group.empty()) {
                std::cerr << "error: agree needs --group or "
                             "--gold-group/--pred-group\n";
                return kExitUsage;
            }
            return run_agree(opts, group, gold_group, pred_group);
        }
        if (eval->parsed())
            return run_eval(opts, predictions_path, gold_annotator);
        if (stats->parsed()) return run_stats(opts, stats_group);
        if (convert->parsed()) return run_convert(opts);
        if (synth->parsed())
            return run_synth(opts, seed, docs, annotators, experts, jitter,
                             max_shift, drop);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NoQualifyingDocuments& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoData;
    } catch (const NoSpans& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        // Parse, validation, and I/O failures.
        std::cerr << "error: " << e.what() << "\n";
        return kExitIngest;
    }
    return kExitUsage;
}

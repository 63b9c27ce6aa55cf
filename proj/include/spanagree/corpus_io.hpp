#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spanagree/metrics.hpp"
#include "spanagree/model.hpp"

namespace spanagree {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
          line(line_no) {}
};

struct MixedFormatError : std::runtime_error {
    int line;
    explicit MixedFormatError(int line_no)
        : std::runtime_error(
              "line " + std::to_string(line_no) +
              ": span-form and token-form records mixed in one file"),
          line(line_no) {}
};

struct DuplicateDocument : std::runtime_error {
    std::string doc_id;
    explicit DuplicateDocument(std::string id)
        : std::runtime_error("duplicate document '" + id + "'"),
          doc_id(std::move(id)) {}
};

namespace detail {

inline nlohmann::json parse_json_line(const std::string& line, int line_no) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
}

inline Label require_label(const nlohmann::json& j, int line_no) {
    if (!j.is_string()) throw ParseError(line_no, "label must be a string");
    const auto label = parse_label(j.get<std::string>());
    if (!label)
        throw ParseError(line_no,
                         "unknown label '" + j.get<std::string>() + "'");
    return *label;
}

inline std::vector<std::string> require_tokens(const nlohmann::json& rec,
                                               int line_no) {
    if (!rec.contains("tokens") || !rec["tokens"].is_array())
        throw ParseError(line_no, "missing 'tokens' array");
    std::vector<std::string> tokens;
    for (const auto& t : rec["tokens"]) {
        if (!t.is_string())
            throw ParseError(line_no, "tokens must be strings");
        tokens.push_back(t.get<std::string>());
    }
    return tokens;
}

inline std::string require_doc_id(const nlohmann::json& rec, int line_no) {
    if (!rec.contains("doc_id") || !rec["doc_id"].is_string())
        throw ParseError(line_no, "missing 'doc_id' string");
    return rec["doc_id"].get<std::string>();
}

inline Document parse_span_form(const nlohmann::json& rec, int line_no) {
    Document doc;
    doc.doc_id = require_doc_id(rec, line_no);
    doc.tokens = require_tokens(rec, line_no);
    if (!rec.contains("annotations") || !rec["annotations"].is_array())
        throw ParseError(line_no, "missing 'annotations' array");
    std::map<std::string, AnnotationSet> by_annotator;
    std::vector<std::string> order;
    for (const auto& a : rec["annotations"]) {
        if (!a.is_object() || !a.contains("annotator") ||
            !a.contains("group") || !a.contains("label") ||
            !a.contains("start") || !a.contains("end"))
            throw ParseError(line_no,
                             "annotation needs annotator/group/label/start/end");
        const auto annotator = a["annotator"].get<std::string>();
        const auto group = parse_group(a["group"].get<std::string>());
        if (!group)
            throw ParseError(line_no, "unknown group '" +
                                          a["group"].get<std::string>() + "'");
        if (!a["start"].is_number_integer() || !a["end"].is_number_integer())
            throw ParseError(line_no, "start/end must be integers");
        Span span{require_label(a["label"], line_no), a["start"].get<int>(),
                  a["end"].get<int>()};
        auto [it, inserted] =
            by_annotator.try_emplace(annotator, AnnotationSet{annotator, *group, {}});
        if (inserted) order.push_back(annotator);
        if (it->second.group != *group)
            throw ValidationError(doc.doc_id, "annotator '" + annotator +
                                                  "' listed in two groups");
        it->second.spans.push_back(span);
    }
    for (const auto& name : order)
        doc.annotation_sets.push_back(by_annotator.at(name));
    validate_document(doc);
    return doc;
}

inline Document parse_token_form(const nlohmann::json& rec, int line_no) {
    Document doc;
    doc.doc_id = require_doc_id(rec, line_no);
    doc.tokens = require_tokens(rec, line_no);
    if (!rec.contains("aggregated") || !rec["aggregated"].is_boolean())
        throw ParseError(line_no, "missing 'aggregated' boolean");
    const bool aggregated = rec["aggregated"].get<bool>();
    if (!rec.contains("token_labels") || !rec["token_labels"].is_object())
        throw ParseError(line_no, "missing 'token_labels' object");
    std::map<std::string, Group> groups;
    if (rec.contains("groups")) {
        for (const auto& [name, g] : rec["groups"].items()) {
            const auto group = parse_group(g.get<std::string>());
            if (!group)
                throw ParseError(line_no,
                                 "unknown group '" + g.get<std::string>() + "'");
            groups[name] = *group;
        }
    }
    for (const auto& [annotator, per_token] : rec["token_labels"].items()) {
        if (!per_token.is_array() ||
            per_token.size() != doc.tokens.size())
            throw ValidationError(
                doc.doc_id, "token_labels for '" + annotator +
                                "' must have one entry per token");
        TokenLabeling labeling;
        for (const auto& cell : per_token) {
            if (!cell.is_array())
                throw ParseError(line_no, "token label cells must be arrays");
            std::vector<Label> set;
            for (const auto& l : cell) set.push_back(require_label(l, line_no));
            if (!aggregated && set.size() > 1)
                throw ValidationError(
                    doc.doc_id, "multi-label token by '" + annotator +
                                    "' in a non-aggregated record");
            labeling.push_back(std::move(set));
        }
        AnnotationSet set;
        set.annotator = annotator;
        const auto git = groups.find(annotator);
        set.group = git == groups.end() ? Group::Crowd : git->second;
        set.spans = spans_from_token_labels(resolve_multilabel(labeling));
        doc.annotation_sets.push_back(std::move(set));
    }
    validate_document(doc);
    return doc;
}

}  // namespace detail

inline Corpus parse_corpus(std::istream& in) {
    Corpus corpus;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    enum class Form { Unknown, Span, Token } form = Form::Unknown;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto rec = detail::parse_json_line(line, line_no);
        if (!rec.is_object())
            throw ParseError(line_no, "record must be a JSON object");
        const Form record_form =
            rec.contains("token_labels") ? Form::Token : Form::Span;
        if (form == Form::Unknown) form = record_form;
        else if (form != record_form) throw MixedFormatError(line_no);
        Document doc = record_form == Form::Span
                           ? detail::parse_span_form(rec, line_no)
                           : detail::parse_token_form(rec, line_no);
        if (!seen_ids.insert(doc.doc_id).second)
            throw ValidationError(doc.doc_id, "duplicate doc_id");
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

// Predicted span sets keyed by doc_id. Bounds against a concrete document's
// token count are checked by the caller once the gold corpus is known.
inline std::map<std::string, std::vector<Span>> parse_predictions(
    std::istream& in) {
    std::map<std::string, std::vector<Span>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto rec = detail::parse_json_line(line, line_no);
        if (!rec.is_object())
            throw ParseError(line_no, "record must be a JSON object");
        const auto doc_id = detail::require_doc_id(rec, line_no);
        if (!rec.contains("spans") || !rec["spans"].is_array())
            throw ParseError(line_no, "missing 'spans' array");
        std::vector<Span> spans;
        for (const auto& s : rec["spans"]) {
            if (!s.is_object() || !s.contains("label") ||
                !s.contains("start") || !s.contains("end"))
                throw ParseError(line_no, "span needs label/start/end");
            Span span{detail::require_label(s["label"], line_no),
                      s["start"].get<int>(), s["end"].get<int>()};
            if (!(0 <= span.start && span.start < span.end))
                throw ValidationError(doc_id, "invalid span boundaries [" +
                                                  std::to_string(span.start) +
                                                  "," + std::to_string(span.end) +
                                                  ")");
            spans.push_back(span);
        }
        if (!out.emplace(doc_id, std::move(spans)).second)
            throw DuplicateDocument(doc_id);
    }
    return out;
}

enum class ReportFormat : std::uint8_t { Csv, Json };

struct ReportRow {
    std::string cohort;
    std::string label;
    std::string criterion;
    std::string metric;
    double mean = 0.0;
    double std = 0.0;
    long n = 0;
};

struct ReportTable {
    std::vector<ReportRow> rows;
    // Stable ordering of metadata keys matters for byte-identical output.
    std::map<std::string, std::string> metadata;
};

namespace detail {

inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline void sort_rows(std::vector<ReportRow>& rows) {
    std::sort(rows.begin(), rows.end(),
              [](const ReportRow& a, const ReportRow& b) {
                  return std::tie(a.cohort, a.label, a.criterion, a.metric) <
                         std::tie(b.cohort, b.label, b.criterion, b.metric);
              });
}

}  // namespace detail

// Deterministic: sorted rows, fixed column order, 6-decimal floats.
inline std::string emit_report(ReportTable table, ReportFormat format) {
    detail::sort_rows(table.rows);
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << "cohort,label,criterion,metric,mean,std,n\n";
        for (const auto& r : table.rows) {
            out << r.cohort << ',' << r.label << ',' << r.criterion << ','
                << r.metric << ',' << detail::format_fixed6(r.mean) << ','
                << detail::format_fixed6(r.std) << ',' << r.n << '\n';
        }
    } else {
        out << "{\n  \"metadata\": {";
        bool first = true;
        for (const auto& [k, v] : table.metadata) {
            out << (first ? "" : ",") << "\n    \"" << detail::json_escape(k)
                << "\": \"" << detail::json_escape(v) << "\"";
            first = false;
        }
        out << (table.metadata.empty() ? "" : "\n  ") << "},\n  \"rows\": [";
        first = true;
        for (const auto& r : table.rows) {
            out << (first ? "" : ",") << "\n    {\"cohort\": \""
                << detail::json_escape(r.cohort) << "\", \"label\": \""
                << detail::json_escape(r.label) << "\", \"criterion\": \""
                << detail::json_escape(r.criterion) << "\", \"metric\": \""
                << detail::json_escape(r.metric) << "\", \"mean\": "
                << detail::format_fixed6(r.mean) << ", \"std\": "
                << detail::format_fixed6(r.std) << ", \"n\": " << r.n << "}";
            first = false;
        }
        out << (table.rows.empty() ? "" : "\n  ") << "]\n}\n";
    }
    return out.str();
}

// Span-form JSONL with fixed key and span ordering, for convert/synth output.
inline std::string write_corpus_spanform(const Corpus& corpus) {
    std::ostringstream out;
    for (const auto& doc : corpus) {
        out << "{\"doc_id\": \"" << detail::json_escape(doc.doc_id)
            << "\", \"tokens\": [";
        for (std::size_t i = 0; i < doc.tokens.size(); ++i)
            out << (i ? ", " : "") << '"' << detail::json_escape(doc.tokens[i])
                << '"';
        out << "], \"annotations\": [";
        struct Entry {
            std::string annotator;
            Group group;
            Span span;
        };
        std::vector<Entry> entries;
        for (const auto& set : doc.annotation_sets)
            for (const auto& s : set.spans)
                entries.push_back({set.annotator, set.group, s});
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) {
                      return std::tie(a.annotator, a.span.start, a.span.end,
                                      a.span.label) <
                             std::tie(b.annotator, b.span.start, b.span.end,
                                      b.span.label);
                  });
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            out << (i ? ", " : "") << "{\"annotator\": \""
                << detail::json_escape(e.annotator) << "\", \"group\": \""
                << group_name(e.group) << "\", \"label\": \""
                << label_name(e.span.label) << "\", \"start\": " << e.span.start
                << ", \"end\": " << e.span.end << "}";
        }
        out << "]}\n";
    }
    return out.str();
}

inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace spanagree

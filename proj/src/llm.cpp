#include "tabx/llm.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tabx/align.hpp"
#include "tabx/errors.hpp"
#include "tabx/util.hpp"

namespace tabx::llm {

using nlohmann::json;

namespace {

const char* kAlignRefineBody = R"tmpl(You are aligning a candidate table against a reference table.

Reference table (ground truth):
{{gt_table}}

Candidate table:
{{cand_table}}

Pairs aligned so far, as 0-based index pairs into the original tables:
{{partial_alignment}}

Propose additional matches for the still-unmatched rows and columns only,
preserving unmatched elements that truly have no counterpart. Reply with a
fenced json block:
```json
{"column_pairs": [[gt_col, cand_col]], "row_pairs": [[gt_row, cand_row]]}
```
Propose only pairs you are confident about; an empty list is a valid answer.
)tmpl";

const char* kCompareTuplesBody = R"tmpl(Compare the aligned cells of a candidate table against a reference table and
report each difference as a structured tuple.

Reference table (ground truth):
{{gt_table}}

Candidate table:
{{cand_table}}

For each cell that differs, identify the data type, the deviation, and units
if any. Reply with a fenced json block:
```json
{"tuples": [{"gt_row": 0, "gt_col": 0, "classification": "partial", "data_type": "number", "magnitude": 0.1, "unit": "", "note": ""}]}
```
classification is one of exact, partial, mismatch. magnitude is the relative
deviation of the candidate value from the reference for partial cells.
)tmpl";

const char* kDirectRubricBody = R"tmpl(Evaluate how faithfully a candidate table reproduces a reference table.

Reference table (ground truth):
{{gt_table}}

Candidate table:
{{cand_table}}

Count the missing rows, extra rows, missing columns, extra columns, and cells
whose values deviate. Reply with a fenced json block:
```json
{"missing_rows": 0, "extra_rows": 0, "missing_columns": 0, "extra_columns": 0, "partial_cells": 0, "score": 0.0}
```
score is the overall error; 0 means a perfect reproduction.
)tmpl";

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

// Everything between fenced code markers; tolerates a language tag after the
// opening fence and a missing closing fence.
std::vector<std::string> fenced_blocks(const std::string& raw) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (true) {
        auto open = raw.find("```", pos);
        if (open == std::string::npos) break;
        auto line_end = raw.find('\n', open + 3);
        if (line_end == std::string::npos) break;
        auto close = raw.find("```", line_end + 1);
        std::string body = close == std::string::npos ? raw.substr(line_end + 1)
                                                      : raw.substr(line_end + 1, close - line_end - 1);
        blocks.push_back(body);
        if (close == std::string::npos) break;
        pos = close + 3;
    }
    return blocks;
}

// Candidate JSON payloads: fenced blocks first, then the whole trimmed text.
std::vector<json> json_candidates(const std::string& raw, std::vector<std::string>& diagnostics) {
    std::vector<json> out;
    auto blocks = fenced_blocks(raw);
    for (const auto& block : blocks) {
        json parsed = json::parse(block, nullptr, false);
        if (parsed.is_discarded())
            diagnostics.push_back("skipped unparseable fenced block");
        else
            out.push_back(std::move(parsed));
    }
    if (out.empty()) {
        std::string trimmed = util::trim(raw);
        if (!trimmed.empty() && (trimmed.front() == '{' || trimmed.front() == '[')) {
            json parsed = json::parse(trimmed, nullptr, false);
            if (parsed.is_discarded())
                diagnostics.push_back("response body is not valid json");
            else
                out.push_back(std::move(parsed));
        }
    }
    return out;
}

}  // namespace

std::string template_id_name(TemplateId id) {
    switch (id) {
        case TemplateId::AlignRefine: return "align-refine";
        case TemplateId::CompareTuples: return "compare-tuples";
        case TemplateId::DirectRubricBaseline: return "direct-rubric-baseline";
    }
    return "align-refine";
}

TemplateId template_id_from_name(std::string_view name) {
    if (name == "align-refine") return TemplateId::AlignRefine;
    if (name == "compare-tuples") return TemplateId::CompareTuples;
    if (name == "direct-rubric-baseline") return TemplateId::DirectRubricBaseline;
    throw Error("unknown template id: " + std::string(name));
}

const PromptTemplate& builtin_template(TemplateId id) {
    static const PromptTemplate align{TemplateId::AlignRefine, kAlignRefineBody};
    static const PromptTemplate tuples{TemplateId::CompareTuples, kCompareTuplesBody};
    static const PromptTemplate direct{TemplateId::DirectRubricBaseline, kDirectRubricBody};
    switch (id) {
        case TemplateId::AlignRefine: return align;
        case TemplateId::CompareTuples: return tuples;
        case TemplateId::DirectRubricBaseline: return direct;
    }
    return align;
}

std::string render_prompt(const PromptTemplate& t, const Bindings& bindings) {
    std::string out = t.body;
    for (const auto& [name, value] : bindings) {
        std::string marker = "{{" + name + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    auto open = out.find("{{");
    if (open != std::string::npos) {
        auto close = out.find("}}", open);
        std::string name = close == std::string::npos ? out.substr(open + 2, 24)
                                                      : out.substr(open + 2, close - open - 2);
        throw MissingBinding("unbound placeholder: " + name);
    }
    return out;
}

std::string table_markdown(const model::Table& t) { return model::to_markdown(t); }

ReplayMode replay_mode_from_name(std::string_view name) {
    std::string low = util::to_lower(name);
    if (low.empty() || low == "off") return ReplayMode::Off;
    if (low == "prefer") return ReplayMode::Prefer;
    if (low == "strict") return ReplayMode::Strict;
    throw Error("unknown replay mode: " + std::string(name));
}

std::string replay_mode_name(ReplayMode m) {
    switch (m) {
        case ReplayMode::Off: return "off";
        case ReplayMode::Prefer: return "prefer";
        case ReplayMode::Strict: return "strict";
    }
    return "off";
}

ProviderConfig ProviderConfig::from_env() {
    ProviderConfig cfg;
    cfg.base_url = env_or("TABX_LLM_BASE_URL", "");
    cfg.model = env_or("TABX_LLM_MODEL", "");
    cfg.api_key = env_or("TABX_LLM_API_KEY", "");
    cfg.replay = replay_mode_from_name(env_or("TABX_LLM_REPLAY", "off"));
    cfg.cache_dir = env_or("TABX_LLM_CACHE", "");
    return cfg;
}

std::string request_hash(std::string_view template_id, std::string_view prompt, std::string_view model) {
    std::string joined;
    joined.reserve(template_id.size() + prompt.size() + model.size() + 2);
    joined.append(template_id);
    joined.push_back('\x1e');
    joined.append(prompt);
    joined.push_back('\x1e');
    joined.append(model);
    return util::sha256_hex(joined);
}

TranscriptCache::TranscriptCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<Transcript> TranscriptCache::lookup(const std::string& hash) const {
    auto path = std::filesystem::path(dir_) / (hash + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    json j = json::parse(util::read_file(path.string()), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    Transcript t;
    t.request_hash = j.value("request_hash", hash);
    t.template_id = j.value("template_id", "");
    t.model = j.value("model", "");
    t.prompt = j.value("prompt", "");
    t.response = j.value("response", "");
    t.timestamp = j.value("timestamp", "");
    t.provider = j.value("provider", "");
    return t;
}

void TranscriptCache::store(const Transcript& t) const {
    json j{{"request_hash", t.request_hash}, {"template_id", t.template_id}, {"model", t.model},
           {"prompt", t.prompt},             {"response", t.response},       {"timestamp", t.timestamp},
           {"provider", t.provider}};
    auto path = std::filesystem::path(dir_) / (t.request_hash + ".json");
    util::write_file_atomic(path.string(), j.dump(2) + "\n");
}

LlmClient::LlmClient(ProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.cache_dir.empty()) cache_.emplace(cfg_.cache_dir);
}

std::string LlmClient::complete(TemplateId id, const std::string& prompt) {
    std::string hash = request_hash(template_id_name(id), prompt, cfg_.model);

    if (cache_ && cfg_.replay != ReplayMode::Off) {
        if (auto hit = cache_->lookup(hash)) return hit->response;
    }
    if (cfg_.replay == ReplayMode::Strict)
        throw ProviderError("replay-strict cache miss for request " + hash.substr(0, 12));

    std::string response = transport(prompt);

    if (cache_) {
        Transcript t;
        t.request_hash = hash;
        t.template_id = template_id_name(id);
        t.model = cfg_.model;
        t.prompt = prompt;
        t.response = response;
        t.timestamp = now_utc();
        t.provider = cfg_.base_url;
        cache_->store(t);
    }
    return response;
}

std::string LlmClient::transport(const std::string& prompt) {
    if (cfg_.base_url.empty()) throw ProviderError("no provider configured (TABX_LLM_BASE_URL unset)");

    // split scheme://host[:port] from an optional path prefix
    std::string root = cfg_.base_url;
    std::string path_prefix;
    auto scheme_end = root.find("://");
    auto path_start = scheme_end == std::string::npos ? root.find('/') : root.find('/', scheme_end + 3);
    if (path_start != std::string::npos) {
        path_prefix = root.substr(path_start);
        root = root.substr(0, path_start);
    }
    while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
    std::string path = path_prefix + "/chat/completions";

    json body{{"model", cfg_.model}, {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
    std::string payload = body.dump();

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    {
        std::unique_lock<std::mutex> lock(gate_mutex_);
        gate_cv_.wait(lock, [this] { return in_flight_ < std::max(1, cfg_.max_concurrency); });
        ++in_flight_;
    }
    struct Release {
        LlmClient* self;
        ~Release() {
            {
                std::lock_guard<std::mutex> lock(self->gate_mutex_);
                --self->in_flight_;
            }
            self->gate_cv_.notify_one();
        }
    } release{this};

    std::string last_error;
    bool timed_out = false;
    int attempts = std::max(1, cfg_.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(250) * (1 << std::min(attempt - 1, 4)));

        httplib::Client cli(root);
        cli.set_connection_timeout(cfg_.timeout_seconds, 0);
        cli.set_read_timeout(cfg_.timeout_seconds, 0);
        cli.set_write_timeout(cfg_.timeout_seconds, 0);

        auto res = cli.Post(path, headers, payload, "application/json");
        if (!res) {
            timed_out = res.error() == httplib::Error::ConnectionTimeout;
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            json reply = json::parse(res->body, nullptr, false);
            if (reply.is_discarded())
                throw ProviderError("provider returned unparseable response body");
            try {
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception&) {
                throw ProviderError("provider response missing choices[0].message.content");
            }
        }
        timed_out = res->status == 408;
        last_error = "HTTP " + std::to_string(res->status);
        bool retryable = res->status >= 500 || res->status == 408 || res->status == 429;
        if (!retryable) throw ProviderError("provider rejected request: " + last_error);
    }
    if (timed_out) throw Timeout("provider timed out after retries: " + last_error);
    throw ProviderError("provider unreachable after retries: " + last_error);
}

AlignmentProposal parse_alignment_response(const std::string& raw) {
    AlignmentProposal out;
    auto candidates = json_candidates(raw, out.diagnostics);
    for (const auto& j : candidates) {
        if (!j.is_object()) {
            out.diagnostics.push_back("skipped non-object block");
            continue;
        }
        auto read_pairs = [&](const char* key, std::vector<ProposedPair>& into) {
            if (!j.contains(key)) return;
            const json& arr = j.at(key);
            if (!arr.is_array()) {
                out.diagnostics.push_back(std::string("skipped non-array ") + key);
                return;
            }
            for (const auto& item : arr) {
                if (item.is_array() && item.size() == 2 && item[0].is_number_unsigned() &&
                    item[1].is_number_unsigned()) {
                    into.push_back({item[0].get<std::size_t>(), item[1].get<std::size_t>()});
                } else if (item.is_object() && item.contains("gt") && item.contains("cand") &&
                           item["gt"].is_number_unsigned() && item["cand"].is_number_unsigned()) {
                    into.push_back({item["gt"].get<std::size_t>(), item["cand"].get<std::size_t>()});
                } else {
                    out.diagnostics.push_back(std::string("skipped malformed pair in ") + key);
                }
            }
        };
        read_pairs("column_pairs", out.column_pairs);
        read_pairs("row_pairs", out.row_pairs);
    }
    return out;
}

TupleParseResult parse_tuple_response(const std::string& raw) {
    TupleParseResult out;
    auto candidates = json_candidates(raw, out.diagnostics);
    for (const auto& j : candidates) {
        const json* arr = nullptr;
        if (j.is_array())
            arr = &j;
        else if (j.is_object() && j.contains("tuples") && j.at("tuples").is_array())
            arr = &j.at("tuples");
        if (!arr) {
            out.diagnostics.push_back("skipped block without a tuples array");
            continue;
        }
        for (const auto& item : *arr) {
            if (!item.is_object()) {
                out.diagnostics.push_back("skipped non-object tuple");
                continue;
            }
            TupleProposal p;
            if (item.contains("gt_row") && item["gt_row"].is_number_unsigned())
                p.gt_row = item["gt_row"].get<std::size_t>();
            if (item.contains("gt_col") && item["gt_col"].is_number_unsigned())
                p.gt_col = item["gt_col"].get<std::size_t>();
            if (item.contains("classification") && item["classification"].is_string())
                p.classification = item["classification"].get<std::string>();
            if (item.contains("data_type") && item["data_type"].is_string())
                p.data_type = item["data_type"].get<std::string>();
            if (item.contains("magnitude") && item["magnitude"].is_number())
                p.magnitude = item["magnitude"].get<double>();
            if (item.contains("unit") && item["unit"].is_string()) p.unit = item["unit"].get<std::string>();
            if (item.contains("note") && item["note"].is_string()) p.note = item["note"].get<std::string>();
            out.tuples.push_back(std::move(p));
        }
    }
    return out;
}

std::optional<double> parse_direct_score(const std::string& raw) {
    std::vector<std::string> diagnostics;
    auto candidates = json_candidates(raw, diagnostics);
    for (const auto& j : candidates)
        if (j.is_object() && j.contains("score") && j.at("score").is_number()) return j.at("score").get<double>();
    return std::nullopt;
}

}  // namespace tabx::llm

// ---- alignment refinement -----------------------------------------------------------

namespace tabx::align {

Alignment refine_with_llm(const Table& gt, const Table& cand, Alignment base, llm::LlmClient& client, bool strict) {
    bool nothing_left = base.unmatched_gt_rows.empty() && base.unmatched_cand_rows.empty() &&
                        base.unmatched_gt_cols.empty() && base.unmatched_cand_cols.empty();
    if (nothing_left) return base;

    nlohmann::json partial{{"column_pairs", nlohmann::json::array()}, {"row_pairs", nlohmann::json::array()}};
    for (const auto& p : base.column_pairs) partial["column_pairs"].push_back({p.gt, p.cand});
    for (const auto& p : base.row_pairs) partial["row_pairs"].push_back({p.gt, p.cand});

    const auto& tmpl = llm::builtin_template(llm::TemplateId::AlignRefine);
    std::string prompt = llm::render_prompt(tmpl, {{"gt_table", llm::table_markdown(gt)},
                                                   {"cand_table", llm::table_markdown(cand)},
                                                   {"partial_alignment", partial.dump()}});

    std::string response;
    try {
        response = client.complete(llm::TemplateId::AlignRefine, prompt);
    } catch (const ProviderError&) {
        if (strict) throw;
        return base;
    }

    auto proposal = llm::parse_alignment_response(response);

    Alignment refined = base;
    std::set<std::size_t> free_gt_cols(base.unmatched_gt_cols.begin(), base.unmatched_gt_cols.end());
    std::set<std::size_t> free_cand_cols(base.unmatched_cand_cols.begin(), base.unmatched_cand_cols.end());
    std::set<std::size_t> free_gt_rows(base.unmatched_gt_rows.begin(), base.unmatched_gt_rows.end());
    std::set<std::size_t> free_cand_rows(base.unmatched_cand_rows.begin(), base.unmatched_cand_rows.end());

    for (const auto& p : proposal.column_pairs) {
        if (!free_gt_cols.count(p.gt) || !free_cand_cols.count(p.cand)) continue;
        free_gt_cols.erase(p.gt);
        free_cand_cols.erase(p.cand);
        refined.column_pairs.push_back({p.gt, p.cand, MatchStrictness::Relaxed, 0.5});
    }
    for (const auto& p : proposal.row_pairs) {
        if (!free_gt_rows.count(p.gt) || !free_cand_rows.count(p.cand)) continue;
        free_gt_rows.erase(p.gt);
        free_cand_rows.erase(p.cand);
        refined.row_pairs.push_back({p.gt, p.cand, MatchStrictness::Relaxed, 0.5});
    }

    finalize_alignment(refined, gt.row_count(), cand.row_count(), gt.column_count(), cand.column_count());
    try {
        validate_alignment(refined, gt, cand);
    } catch (const InconsistentAlignment&) {
        return base;
    }
    return refined;
}

}  // namespace tabx::align

// ---- single-cell second opinion -------------------------------------------------------

namespace tabx::compare {

CellComparison compare_cells_llm(const Cell& gt, const Cell& cand, const CellComparison& deterministic,
                                 llm::LlmClient& client) {
    model::Table gt_table, cand_table;
    gt_table.column_headers = {{"value"}};
    cand_table.column_headers = {{"value"}};
    gt_table.rows = {{gt}};
    cand_table.rows = {{cand}};

    const auto& tmpl = llm::builtin_template(llm::TemplateId::CompareTuples);
    std::string prompt = llm::render_prompt(
        tmpl, {{"gt_table", llm::table_markdown(gt_table)}, {"cand_table", llm::table_markdown(cand_table)}});

    std::string response;
    try {
        response = client.complete(llm::TemplateId::CompareTuples, prompt);
    } catch (const ProviderError&) {
        return deterministic;
    }

    auto parsed = llm::parse_tuple_response(response);
    for (const auto& p : parsed.tuples) {
        if (!p.classification) continue;
        Classification cls;
        if (*p.classification == "exact")
            cls = Classification::Exact;
        else if (*p.classification == "partial")
            cls = Classification::Partial;
        else if (*p.classification == "mismatch")
            cls = Classification::Mismatch;
        else
            continue;

        // invariant gates: partial needs a positive finite magnitude, exact
        // must not carry a deviation, units must stay dimension-compatible
        if (cls == Classification::Partial &&
            (!p.magnitude || !std::isfinite(*p.magnitude) || *p.magnitude <= 0.0))
            continue;
        if (cls == Classification::Exact && p.magnitude && *p.magnitude != 0.0) continue;
        if (p.unit && !p.unit->empty()) {
            auto proposed_unit = lookup_unit(*p.unit);
            if (!proposed_unit) continue;
            if (deterministic.gt_unit && proposed_unit->dimension != deterministic.gt_unit->dimension) continue;
        }
        if (deterministic.gt_unit && deterministic.cand_unit &&
            deterministic.gt_unit->dimension != deterministic.cand_unit->dimension &&
            cls != Classification::Mismatch)
            continue;  // dimensionally incompatible cells cannot be exact or partial

        CellComparison out = deterministic;
        out.classification = cls;
        out.magnitude = cls == Classification::Partial ? p.magnitude : std::nullopt;
        out.note = p.note && !p.note->empty() ? *p.note : "provider second opinion";
        if (cls != Classification::Partial) out.zero_reference = false;
        return out;
    }
    return deterministic;
}

}  // namespace tabx::compare

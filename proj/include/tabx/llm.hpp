#pragma once

#include <condition_variable>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabx/compare.hpp"
#include "tabx/table.hpp"

namespace tabx::llm {

enum class TemplateId { AlignRefine, CompareTuples, DirectRubricBaseline };

std::string template_id_name(TemplateId id);
TemplateId template_id_from_name(std::string_view name);

struct PromptTemplate {
    TemplateId id = TemplateId::AlignRefine;
    std::string body;
};

const PromptTemplate& builtin_template(TemplateId id);

using Bindings = std::map<std::string, std::string>;

// Substitutes {{name}} placeholders; throws MissingBinding when one is left
// unbound. Extra bindings are ignored.
std::string render_prompt(const PromptTemplate& t, const Bindings& bindings);

std::string table_markdown(const model::Table& t);

enum class ReplayMode { Off, Prefer, Strict };

ReplayMode replay_mode_from_name(std::string_view name);
std::string replay_mode_name(ReplayMode m);

struct ProviderConfig {
    std::string base_url;  // scheme://host[:port][/path-prefix]
    std::string model;
    std::string api_key;
    ReplayMode replay = ReplayMode::Off;
    std::string cache_dir;
    int max_retries = 3;
    int timeout_seconds = 30;
    int max_concurrency = 4;

    // TABX_LLM_BASE_URL, TABX_LLM_MODEL, TABX_LLM_API_KEY, TABX_LLM_REPLAY,
    // TABX_LLM_CACHE
    static ProviderConfig from_env();
};

struct Transcript {
    std::string request_hash;
    std::string template_id;
    std::string model;
    std::string prompt;
    std::string response;
    std::string timestamp;
    std::string provider;
};

std::string request_hash(std::string_view template_id, std::string_view prompt, std::string_view model);

// One JSON file per transcript, named by request hash; writes are atomic.
class TranscriptCache {
public:
    explicit TranscriptCache(std::string dir);
    std::optional<Transcript> lookup(const std::string& hash) const;
    void store(const Transcript& t) const;
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
};

class LlmClient {
public:
    explicit LlmClient(ProviderConfig cfg);

    // Replay lookup first (when enabled), then HTTP chat completion with
    // bounded retries and backoff. Sampling parameters are never sent; the
    // provider's defaults apply. Throws ProviderError or Timeout.
    std::string complete(TemplateId id, const std::string& prompt);

    const ProviderConfig& config() const { return cfg_; }

private:
    std::string transport(const std::string& prompt);

    ProviderConfig cfg_;
    std::optional<TranscriptCache> cache_;
    std::mutex gate_mutex_;
    std::condition_variable gate_cv_;
    int in_flight_ = 0;
};

struct ProposedPair {
    std::size_t gt = 0;
    std::size_t cand = 0;
};

struct AlignmentProposal {
    std::vector<ProposedPair> column_pairs, row_pairs;
    std::vector<std::string> diagnostics;  // skipped-segment notes
};

// Total: never throws on arbitrary text; garbage yields an empty proposal
// with diagnostics.
AlignmentProposal parse_alignment_response(const std::string& raw);

struct TupleProposal {
    std::optional<std::size_t> gt_row, gt_col;
    std::optional<std::string> classification;
    std::optional<std::string> data_type;
    std::optional<double> magnitude;
    std::optional<std::string> unit;
    std::optional<std::string> note;
};

struct TupleParseResult {
    std::vector<TupleProposal> tuples;
    std::vector<std::string> diagnostics;
};

// Total, like parse_alignment_response.
TupleParseResult parse_tuple_response(const std::string& raw);

// Total; the overall error score from a direct-rubric-baseline reply.
std::optional<double> parse_direct_score(const std::string& raw);

}  // namespace tabx::llm

namespace tabx::compare {

// Consults the provider about one cell pair and adopts its verdict only when
// the proposal passes the tuple invariants (valid classification, positive
// magnitude for partial, none for exact, compatible units). On provider
// failure or rejection the deterministic result stands.
CellComparison compare_cells_llm(const Cell& gt, const Cell& cand, const CellComparison& deterministic,
                                 llm::LlmClient& client);

}  // namespace tabx::compare

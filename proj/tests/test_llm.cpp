#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "tabx/errors.hpp"
#include "tabx/llm.hpp"
#include "tabx/table.hpp"
#include "tabx/util.hpp"

using namespace tabx;
using namespace tabx::llm;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

model::Table small_table() {
    model::Table t;
    t.column_headers = {{"name"}, {"score"}};
    t.rows = {{model::Cell{"alice"}, model::Cell{"10"}}, {model::Cell{"bob"}, model::Cell{"12"}}};
    return t;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) : path(fs::temp_directory_path() / tag) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Loopback chat-completions stub. handler returns (status, body).
struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    explicit StubServer(std::function<std::pair<int, std::string>(const httplib::Request&)> handler) {
        server.Post("/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            auto [status, body] = handler(req);
            res.status = status;
            res.set_content(body, "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

std::string envelope(const std::string& content) {
    json message = {{"role", "assistant"}, {"content", content}};
    json reply;
    reply["choices"] = json::array({json{{"message", message}}});
    return reply.dump();
}

ProviderConfig offline_config(ReplayMode mode, const std::string& cache_dir) {
    ProviderConfig cfg;
    cfg.model = "test-model";
    cfg.replay = mode;
    cfg.cache_dir = cache_dir;
    return cfg;
}

}  // namespace

TEST_CASE("builtin templates render tables and reject unbound placeholders") {
    auto t = small_table();
    auto md = table_markdown(t);
    CHECK(md.find("| name | score |") != std::string::npos);
    CHECK(md.find("alice") != std::string::npos);

    const auto& align = builtin_template(TemplateId::AlignRefine);
    auto prompt = render_prompt(align, {{"gt_table", md}, {"cand_table", md}, {"partial_alignment", "{}"}});
    CHECK(prompt.find("{{") == std::string::npos);
    CHECK(prompt.find("alice") != std::string::npos);
    CHECK_THROWS_AS(render_prompt(align, {{"gt_table", md}}), MissingBinding);

    const auto& tuples = builtin_template(TemplateId::CompareTuples);
    auto prompt2 = render_prompt(tuples, {{"gt_table", md}, {"cand_table", md}});
    CHECK(prompt2.find("{{") == std::string::npos);

    const auto& direct = builtin_template(TemplateId::DirectRubricBaseline);
    auto prompt3 = render_prompt(direct, {{"gt_table", md}, {"cand_table", md}});
    CHECK(prompt3.find("{{") == std::string::npos);

    for (TemplateId id : {TemplateId::AlignRefine, TemplateId::CompareTuples, TemplateId::DirectRubricBaseline})
        CHECK(template_id_from_name(template_id_name(id)) == id);
}

TEST_CASE("replay mode names") {
    CHECK(replay_mode_from_name("off") == ReplayMode::Off);
    CHECK(replay_mode_from_name("prefer") == ReplayMode::Prefer);
    CHECK(replay_mode_from_name("strict") == ReplayMode::Strict);
    CHECK_THROWS_AS(replay_mode_from_name("sometimes"), Error);
    for (ReplayMode m : {ReplayMode::Off, ReplayMode::Prefer, ReplayMode::Strict})
        CHECK(replay_mode_from_name(replay_mode_name(m)) == m);
}

TEST_CASE("request hashes are stable and sensitive to every component") {
    auto h = request_hash("align-refine", "prompt body", "model-a");
    CHECK(h == request_hash("align-refine", "prompt body", "model-a"));
    CHECK(h.size() == 64);
    CHECK(h != request_hash("compare-tuples", "prompt body", "model-a"));
    CHECK(h != request_hash("align-refine", "prompt body!", "model-a"));
    CHECK(h != request_hash("align-refine", "prompt body", "model-b"));
    // concatenation boundaries must not be confusable
    CHECK(request_hash("ab", "c", "m") != request_hash("a", "bc", "m"));
}

TEST_CASE("transcript cache round-trips and tolerates corruption") {
    TempDir dir("tabx-cache-test");
    TranscriptCache cache(dir.path.string());

    Transcript t;
    t.request_hash = request_hash("align-refine", "p", "m");
    t.template_id = "align-refine";
    t.model = "m";
    t.prompt = "p";
    t.response = "hello";
    t.timestamp = "2024-01-01T00:00:00Z";
    t.provider = "unit-test";
    cache.store(t);

    auto back = cache.lookup(t.request_hash);
    REQUIRE(back.has_value());
    CHECK(back->response == "hello");
    CHECK(back->model == "m");
    CHECK(back->template_id == "align-refine");

    CHECK_FALSE(cache.lookup("0000000000000000000000000000000000000000000000000000000000000000").has_value());

    util::write_file_atomic((dir.path / (t.request_hash + ".json")).string(), "{not json");
    CHECK_FALSE(cache.lookup(t.request_hash).has_value());
}

TEST_CASE("strict replay misses fail without touching the network") {
    TempDir dir("tabx-replay-strict");
    LlmClient client(offline_config(ReplayMode::Strict, dir.path.string()));
    CHECK_THROWS_AS(client.complete(TemplateId::AlignRefine, "never cached"), ProviderError);
}

TEST_CASE("prefer replay serves cached transcripts with no provider configured") {
    TempDir dir("tabx-replay-prefer");
    TranscriptCache cache(dir.path.string());
    std::string prompt = "the cached prompt";
    Transcript t;
    t.request_hash = request_hash("compare-tuples", prompt, "test-model");
    t.template_id = "compare-tuples";
    t.model = "test-model";
    t.prompt = prompt;
    t.response = "from the cache";
    cache.store(t);

    LlmClient client(offline_config(ReplayMode::Prefer, dir.path.string()));
    CHECK(client.complete(TemplateId::CompareTuples, prompt) == "from the cache");
}

TEST_CASE("no provider and no replay raises a provider error") {
    TempDir dir("tabx-no-provider");
    LlmClient client(offline_config(ReplayMode::Off, dir.path.string()));
    CHECK_THROWS_WITH_AS(client.complete(TemplateId::AlignRefine, "p"),
                         doctest::Contains("no provider configured"), ProviderError);
}

TEST_CASE("live completions parse the reply envelope and record a transcript") {
    StubServer stub([](const httplib::Request& req) {
        auto body = json::parse(req.body);
        CHECK(body.at("model") == "test-model");
        CHECK(body.at("messages").at(0).at("role") == "user");
        CHECK(body.count("temperature") == 0);  // no sampling parameters on the wire
        CHECK(req.get_header_value("Authorization") == "Bearer sk-unit");
        return std::make_pair(200, envelope("stubbed reply"));
    });

    TempDir dir("tabx-live");
    ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
    cfg.base_url = stub.base_url();
    cfg.api_key = "sk-unit";
    LlmClient client(cfg);

    std::string prompt = "live prompt";
    CHECK(client.complete(TemplateId::AlignRefine, prompt) == "stubbed reply");
    CHECK(stub.hits == 1);

    // transcript landed in the cache under the request hash
    TranscriptCache cache(dir.path.string());
    auto t = cache.lookup(request_hash("align-refine", prompt, "test-model"));
    REQUIRE(t.has_value());
    CHECK(t->response == "stubbed reply");

    // a second client in prefer mode replays it without another request
    cfg.replay = ReplayMode::Prefer;
    LlmClient replayer(cfg);
    CHECK(replayer.complete(TemplateId::AlignRefine, prompt) == "stubbed reply");
    CHECK(stub.hits == 1);
}

TEST_CASE("server errors are retried up to the limit then surfaced") {
    StubServer stub([](const httplib::Request&) { return std::make_pair(500, std::string("{)")); });
    TempDir dir("tabx-retry");
    ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
    cfg.base_url = stub.base_url();
    cfg.max_retries = 2;
    LlmClient client(cfg);
    CHECK_THROWS_AS(client.complete(TemplateId::AlignRefine, "p"), ProviderError);
    CHECK(stub.hits == 2);
}

TEST_CASE("client errors are not retried") {
    StubServer stub([](const httplib::Request&) { return std::make_pair(400, std::string("{\"error\":\"bad\"}")); });
    TempDir dir("tabx-400");
    ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
    cfg.base_url = stub.base_url();
    cfg.max_retries = 3;
    LlmClient client(cfg);
    CHECK_THROWS_AS(client.complete(TemplateId::AlignRefine, "p"), ProviderError);
    CHECK(stub.hits == 1);
}

TEST_CASE("malformed success envelopes are provider errors") {
    StubServer stub([](const httplib::Request&) { return std::make_pair(200, std::string("{\"choices\":[]}")); });
    TempDir dir("tabx-envelope");
    ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
    cfg.base_url = stub.base_url();
    cfg.max_retries = 1;
    LlmClient client(cfg);
    CHECK_THROWS_AS(client.complete(TemplateId::AlignRefine, "p"), ProviderError);
}

TEST_CASE("provider config reads the environment") {
    setenv("TABX_LLM_BASE_URL", "http://example.invalid:9", 1);
    setenv("TABX_LLM_MODEL", "env-model", 1);
    setenv("TABX_LLM_API_KEY", "env-key", 1);
    setenv("TABX_LLM_REPLAY", "strict", 1);
    setenv("TABX_LLM_CACHE", "/tmp/tabx-env-cache", 1);
    auto cfg = ProviderConfig::from_env();
    CHECK(cfg.base_url == "http://example.invalid:9");
    CHECK(cfg.model == "env-model");
    CHECK(cfg.api_key == "env-key");
    CHECK(cfg.replay == ReplayMode::Strict);
    CHECK(cfg.cache_dir == "/tmp/tabx-env-cache");
    unsetenv("TABX_LLM_BASE_URL");
    unsetenv("TABX_LLM_MODEL");
    unsetenv("TABX_LLM_API_KEY");
    unsetenv("TABX_LLM_REPLAY");
    unsetenv("TABX_LLM_CACHE");
}

TEST_CASE("alignment responses parse fenced json, objects, or nothing at all") {
    auto good = parse_alignment_response(
        "Here you go:\n```json\n{\"column_pairs\": [[0, 1], [2, 0]], \"row_pairs\": [{\"gt\": 1, \"cand\": 3}]}\n```");
    REQUIRE(good.column_pairs.size() == 2);
    CHECK(good.column_pairs[0].gt == 0);
    CHECK(good.column_pairs[0].cand == 1);
    CHECK(good.column_pairs[1].gt == 2);
    CHECK(good.column_pairs[1].cand == 0);
    REQUIRE(good.row_pairs.size() == 1);
    CHECK(good.row_pairs[0].gt == 1);
    CHECK(good.row_pairs[0].cand == 3);

    auto bare = parse_alignment_response("{\"column_pairs\": [[1, 1]], \"row_pairs\": []}");
    CHECK(bare.column_pairs.size() == 1);

    auto garbage = parse_alignment_response("I am sorry, I cannot help with tables.");
    CHECK(garbage.column_pairs.empty());
    CHECK(garbage.row_pairs.empty());

    auto half = parse_alignment_response("```json\n{\"column_pairs\": [[0, 0], \"oops\"], \"row_pairs\": []}\n```");
    CHECK(half.column_pairs.size() == 1);
    CHECK(!half.diagnostics.empty());

    CHECK(parse_alignment_response("").column_pairs.empty());
}

TEST_CASE("tuple responses parse proposals and skip broken entries") {
    auto res = parse_tuple_response(
        "```json\n{\"tuples\": ["
        "{\"gt_row\": 0, \"gt_col\": 2, \"classification\": \"partial\", \"magnitude\": 0.25, \"unit\": \"kg\"},"
        "{\"gt_row\": 1, \"gt_col\": 0, \"classification\": \"exact\"},"
        "\"nonsense\"]}\n```");
    REQUIRE(res.tuples.size() == 2);
    CHECK(res.tuples[0].gt_row == 0);
    CHECK(res.tuples[0].gt_col == 2);
    CHECK(res.tuples[0].classification == "partial");
    CHECK(res.tuples[0].magnitude == doctest::Approx(0.25));
    CHECK(res.tuples[0].unit == "kg");
    CHECK(res.tuples[1].classification == "exact");
    CHECK_FALSE(res.tuples[1].magnitude.has_value());
    CHECK(!res.diagnostics.empty());

    auto bare = parse_tuple_response("[{\"classification\": \"mismatch\"}]");
    REQUIRE(bare.tuples.size() == 1);
    CHECK(bare.tuples[0].classification == "mismatch");

    CHECK(parse_tuple_response("no json here").tuples.empty());
}

TEST_CASE("direct scores parse from fenced replies") {
    CHECK(parse_direct_score("```json\n{\"score\": 0.37}\n```") == doctest::Approx(0.37));
    CHECK(parse_direct_score("{\"score\": 0}") == doctest::Approx(0.0));
    CHECK_FALSE(parse_direct_score("the score is large").has_value());
}

TEST_CASE("cell second opinions are gated by tuple invariants") {
    using namespace tabx::compare;
    model::Cell gt{"2020-03-03"};
    model::Cell cand{"2020-03-05"};
    CellComparison det = compare_cells(gt, cand, ValueKind::Date);
    REQUIRE(det.classification == Classification::Partial);

    auto serve = [](const std::string& content) {
        return [content](const httplib::Request&) { return std::make_pair(200, envelope(content)); };
    };

    // valid mismatch override is adopted
    {
        StubServer stub(serve("```json\n{\"tuples\":[{\"classification\":\"mismatch\",\"note\":\"wrong day\"}]}\n```"));
        TempDir dir("tabx-say-mismatch");
        ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
        cfg.base_url = stub.base_url();
        LlmClient client(cfg);
        auto out = compare_cells_llm(gt, cand, det, client);
        CHECK(out.classification == Classification::Mismatch);
        CHECK_FALSE(out.magnitude.has_value());
        CHECK(out.note == "wrong day");
    }

    // partial without a magnitude is rejected; the deterministic verdict stands
    {
        StubServer stub(serve("```json\n{\"tuples\":[{\"classification\":\"partial\"}]}\n```"));
        TempDir dir("tabx-bad-partial");
        ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
        cfg.base_url = stub.base_url();
        LlmClient client(cfg);
        auto out = compare_cells_llm(gt, cand, det, client);
        CHECK(out.classification == det.classification);
        CHECK(out.magnitude == det.magnitude);
    }

    // provider failure keeps the deterministic verdict
    {
        StubServer stub([](const httplib::Request&) { return std::make_pair(500, std::string("boom")); });
        TempDir dir("tabx-cells-500");
        ProviderConfig cfg = offline_config(ReplayMode::Off, dir.path.string());
        cfg.base_url = stub.base_url();
        cfg.max_retries = 1;
        LlmClient client(cfg);
        auto out = compare_cells_llm(gt, cand, det, client);
        CHECK(out.classification == det.classification);
    }
}

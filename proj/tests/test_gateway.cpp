#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <thread>

#include <httplib.h>

#include "vpr/gateway.hpp"
#include "vpr/scripted.hpp"

#include "support.hpp"

using namespace vpr;
using vpr::test::fast_config;

// ---------------------------------------------------------------------------
// extract_json_object
// ---------------------------------------------------------------------------

TEST_CASE("extracts a clean object") {
    const auto j = extract_json_object(R"({"label":"ET","reason":"ok"})");
    CHECK(j.size() == 2);
    CHECK(j.at("label") == "ET");
}

TEST_CASE("extracts a fenced object with prose around it") {
    const auto j = extract_json_object("Sure! ```json\n{\"a\":1}\n```");
    CHECK(j == nlohmann::json{{"a", 1}});
}

TEST_CASE("extracts the first balanced object, ignoring trailing text") {
    const auto j = extract_json_object("prefix {\"a\": {\"b\": 2}} suffix {\"c\": 3}");
    CHECK(j == nlohmann::json{{"a", {{"b", 2}}}});
}

TEST_CASE("braces inside strings do not end the scan") {
    const auto j = extract_json_object(R"({"text": "quoted } brace { and \" escape"})");
    CHECK(j.at("text") == "quoted } brace { and \" escape");
}

TEST_CASE("missing or broken JSON raises the right error") {
    CHECK_THROWS_AS(extract_json_object("no braces here"), NoJsonFoundError);
    CHECK_THROWS_AS(extract_json_object(""), NoJsonFoundError);
    CHECK_THROWS_AS(extract_json_object("{\"a\": unquoted}"), MalformedJsonError);
    CHECK_THROWS_AS(extract_json_object("{\"a\": 1"), MalformedJsonError);
}

namespace {

nlohmann::json random_json_value(std::mt19937& rng, int depth);

nlohmann::json random_json_object(std::mt19937& rng, int depth) {
    nlohmann::json obj = nlohmann::json::object();
    const std::size_t keys = rng() % 4;
    for (std::size_t k = 0; k < keys; ++k) {
        obj["k" + std::to_string(rng() % 100)] = random_json_value(rng, depth + 1);
    }
    return obj;
}

nlohmann::json random_json_value(std::mt19937& rng, int depth) {
    static const char* kStrings[] = {"plain", "with \"quotes\"", "braces {inside}",
                                     "back\\slash", "fence ``` text", "}{"};
    if (depth < 3 && rng() % 4 == 0) return random_json_object(rng, depth);
    switch (rng() % 4) {
        case 0: return static_cast<int>(rng() % 1000);
        case 1: return (rng() % 2) == 0;
        case 2: return kStrings[rng() % std::size(kStrings)];
        default: {
            nlohmann::json arr = nlohmann::json::array();
            const std::size_t items = rng() % 3;
            for (std::size_t k = 0; k < items; ++k) {
                arr.push_back(random_json_value(rng, depth + 1));
            }
            return arr;
        }
    }
}

}  // namespace

TEST_CASE("extraction inverts serialization for random objects") {
    std::mt19937 rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        const nlohmann::json original = random_json_object(rng, 0);
        CHECK(extract_json_object(original.dump()) == original);
        CHECK(extract_json_object("Model says:\n" + original.dump(2) + "\nthanks!") ==
              original);
    }
}

// ---------------------------------------------------------------------------
// Scripted backend and chat()
// ---------------------------------------------------------------------------

TEST_CASE("scripted responses come back in order and record requests") {
    ScriptedChatBackend backend(script_from_strings({"one", "two", "three"}));
    ChatRequest request;
    request.system_prompt = "sys";
    request.user_message = "payload text";
    const auto config = fast_config();

    CHECK(chat(backend, request, config).content == "one");
    CHECK(chat(backend, request, config).content == "two");
    CHECK(chat(backend, request, config).content == "three");

    const auto requests = backend.requests();
    REQUIRE(requests.size() == 3);
    // Requests are logged byte for byte.
    CHECK(requests[0].system_prompt == "sys");
    CHECK(requests[0].user_message == "payload text");
    CHECK(backend.remaining() == 0);
}

TEST_CASE("script exhaustion surfaces as its own error") {
    ScriptedChatBackend backend(script_from_strings({"only"}));
    ChatRequest request;
    request.user_message = "x";
    const auto config = fast_config();
    CHECK(chat(backend, request, config).content == "only");
    CHECK_THROWS_AS(chat(backend, request, config), ScriptExhaustedError);
}

TEST_CASE("an empty script is rejected") {
    CHECK_THROWS_AS(ScriptedChatBackend({}), EmptyInputError);
}

TEST_CASE("chat retries transport failures and succeeds on the third attempt") {
    ScriptedChatBackend backend({ScriptEntry::transport_failure(),
                                 ScriptEntry::transport_failure(),
                                 ScriptEntry::text("recovered")});
    ChatRequest request;
    request.user_message = "x";
    auto config = fast_config();
    config.retry_limit = 3;
    CHECK(chat(backend, request, config).content == "recovered");
    CHECK(backend.requests().size() == 3);
}

TEST_CASE("chat with no retry budget propagates the transport error") {
    ScriptedChatBackend backend({ScriptEntry::transport_failure()});
    ChatRequest request;
    request.user_message = "x";
    auto config = fast_config();
    config.retry_limit = 0;
    CHECK_THROWS_AS(chat(backend, request, config), TransportError);
    CHECK(backend.requests().size() == 1);
}

TEST_CASE("backend failures are not retried") {
    ScriptedChatBackend backend(
        {ScriptEntry::backend_failure(), ScriptEntry::text("never served")});
    ChatRequest request;
    request.user_message = "x";
    auto config = fast_config();
    config.retry_limit = 3;
    CHECK_THROWS_AS(chat(backend, request, config), BackendError);
    CHECK(backend.requests().size() == 1);
}

TEST_CASE("empty completions and invalid parameters are rejected") {
    ScriptedChatBackend backend(script_from_strings({""}));
    ChatRequest request;
    request.user_message = "x";
    const auto config = fast_config();
    CHECK_THROWS_AS(chat(backend, request, config), EmptyCompletionError);

    ScriptedChatBackend spare(script_from_strings({"ok"}));
    ChatRequest bad_temperature;
    bad_temperature.user_message = "x";
    bad_temperature.temperature = 2.5;
    CHECK_THROWS_AS(chat(spare, bad_temperature, config), Error);
    ChatRequest bad_tokens;
    bad_tokens.user_message = "x";
    bad_tokens.max_tokens = 0;
    CHECK_THROWS_AS(chat(spare, bad_tokens, config), Error);
}

// ---------------------------------------------------------------------------
// embed()
// ---------------------------------------------------------------------------

TEST_CASE("a constant stub maps every text to the same vector") {
    FixedEmbeddingBackend backend;
    backend.set_default({1, 0, 0});
    const auto vectors = embed(backend, {"a", "b", "c"}, fast_config());
    REQUIRE(vectors.size() == 3);
    for (const auto& v : vectors) CHECK(v == EmbeddingVector{{1, 0, 0}});
}

TEST_CASE("character-frequency embeddings are anagram-invariant") {
    CharFrequencyEmbeddingBackend backend;
    const auto vectors = embed(backend, {"ab", "ba"}, fast_config());
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0] == vectors[1]);
    // Hand count: one 'a', one 'b', nothing else.
    CHECK(vectors[0].values[0] == 1.0);
    CHECK(vectors[0].values[1] == 1.0);
    CHECK(std::accumulate(vectors[0].values.begin(), vectors[0].values.end(), 0.0) == 2.0);
}

TEST_CASE("embed rejects empty input and blank texts") {
    CharFrequencyEmbeddingBackend backend;
    CHECK_THROWS_AS(embed(backend, {}, fast_config()), EmptyInputError);
    CHECK_THROWS_AS(embed(backend, {"ok", "  "}, fast_config()), EmptyInputError);
}

TEST_CASE("embed rejects inconsistent dimensions") {
    FixedEmbeddingBackend backend;
    backend.set("a", {1, 0});
    backend.set("b", {1, 0, 0});
    CHECK_THROWS_AS(embed(backend, {"a", "b"}, fast_config()), DimensionMismatchError);
}

TEST_CASE("embedding order is preserved under shuffling") {
    CharFrequencyEmbeddingBackend backend;
    const std::vector<std::string> texts = {"alpha", "bravo", "charlie", "delta", "echo"};
    const auto straight = embed(backend, texts, fast_config());

    std::vector<std::size_t> order(texts.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(5);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> shuffled;
    for (std::size_t i : order) shuffled.push_back(texts[i]);
    const auto mixed = embed(backend, shuffled, fast_config());

    for (std::size_t k = 0; k < order.size(); ++k) {
        CHECK(mixed[k] == straight[order[k]]);
    }
}

// ---------------------------------------------------------------------------
// HTTP wire format
// ---------------------------------------------------------------------------

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    nlohmann::json last_chat_body;
    std::string last_auth;

    TestServer() {
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        last_chat_body = nlohmann::json::parse(req.body);
                        last_auth = req.get_header_value("Authorization");
                        res.set_content(
                            nlohmann::json{
                                {"choices",
                                 {{{"message", {{"role", "assistant"},
                                                {"content", "hello from server"}}}}}}}
                                .dump(),
                            "application/json");
                    });
        server.Post("/v1/embeddings",
                    [](const httplib::Request& req, httplib::Response& res) {
                        const auto body = nlohmann::json::parse(req.body);
                        nlohmann::json data = nlohmann::json::array();
                        int k = 0;
                        for (const auto& _ : body.at("input")) {
                            (void)_;
                            data.push_back({{"embedding", {1.0 * k, 2.0, 3.0}}});
                            ++k;
                        }
                        res.set_content(nlohmann::json{{"data", data}}.dump(),
                                        "application/json");
                    });
        server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        thread.join();
    }

    std::string base() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("the chat backend speaks the chat-completion convention") {
    TestServer server;
    auto config = fast_config();
    config.chat_endpoint_url = server.base() + "/v1/chat/completions";
    config.api_key = "sk-test";
    HttpChatBackend backend(config);

    ChatRequest request;
    request.system_prompt = "be terse";
    request.user_message = "say hi";
    request.temperature = 0.7;
    request.max_tokens = 64;
    request.model_id = "test-model";

    const auto response = chat(backend, request, config);
    CHECK(response.content == "hello from server");

    const auto& body = server.last_chat_body;
    CHECK(body.at("model") == "test-model");
    CHECK(body.at("temperature") == 0.7);
    CHECK(body.at("max_tokens") == 64);
    REQUIRE(body.at("messages").size() == 2);
    CHECK(body.at("messages").at(0).at("role") == "system");
    CHECK(body.at("messages").at(0).at("content") == "be terse");
    CHECK(body.at("messages").at(1).at("role") == "user");
    CHECK(body.at("messages").at(1).at("content") == "say hi");
    CHECK(server.last_auth == "Bearer sk-test");
}

TEST_CASE("an empty system prompt is omitted from the wire") {
    TestServer server;
    auto config = fast_config();
    config.chat_endpoint_url = server.base() + "/v1/chat/completions";
    HttpChatBackend backend(config);
    ChatRequest request;
    request.user_message = "lone user turn";
    chat(backend, request, config);
    REQUIRE(server.last_chat_body.at("messages").size() == 1);
    CHECK(server.last_chat_body.at("messages").at(0).at("role") == "user");
}

TEST_CASE("the embedding backend speaks the embeddings convention") {
    TestServer server;
    auto config = fast_config();
    config.embedding_endpoint_url = server.base() + "/v1/embeddings";
    HttpEmbeddingBackend backend(config);
    const auto vectors = embed(backend, {"one", "two"}, config);
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0].values == std::vector<double>{0.0, 2.0, 3.0});
    CHECK(vectors[1].values == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("non-2xx statuses raise BackendError") {
    TestServer server;
    auto config = fast_config();
    config.chat_endpoint_url = server.base() + "/broken";
    HttpChatBackend backend(config);
    ChatRequest request;
    request.user_message = "x";
    CHECK_THROWS_AS(chat(backend, request, config), BackendError);
}

TEST_CASE("an unreachable endpoint raises TransportError") {
    auto config = fast_config();
    config.chat_endpoint_url = "http://127.0.0.1:9/v1/chat/completions";
    config.retry_limit = 0;
    config.timeout = std::chrono::milliseconds{900};
    HttpChatBackend backend(config);
    ChatRequest request;
    request.user_message = "x";
    CHECK_THROWS_AS(chat(backend, request, config), TransportError);
}

TEST_CASE("malformed endpoint urls are rejected") {
    auto config = fast_config();
    config.chat_endpoint_url = "not a url";
    HttpChatBackend backend(config);
    ChatRequest request;
    request.user_message = "x";
    CHECK_THROWS_AS(chat(backend, request, config), ConfigError);
}

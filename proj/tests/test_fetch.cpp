#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <thread>

#include "wise/fetch.hpp"
#include "wise/filter.hpp"
#include "wise/html.hpp"
#include "wise/serialize.hpp"
#include "wise/tokenize.hpp"
#include "wise/url.hpp"

using namespace wise;
namespace fs = std::filesystem;

namespace {

const fs::path kData = WISE_DATA_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("wise_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::size_t whitespace_words(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

FetchPolicy quick_policy() {
    FetchPolicy p;
    p.politeness_delay = std::chrono::milliseconds(0);
    p.timeout = std::chrono::milliseconds(3000);
    return p;
}

// Serves a handful of canned responses on a random loopback port.
class LocalServer {
public:
    LocalServer() {
        server_.Get("/ok.html", [this](const httplib::Request&, httplib::Response& res) {
            ++hits_;
            res.set_content("<html><body><h1>HBB</h1><p>The HBB gene encodes beta globin. "
                            "<a href=\"next.html\">next page</a></p></body></html>",
                            "text/html");
        });
        server_.Get("/forbidden", [](const httplib::Request&, httplib::Response& res) {
            res.status = 403;
            res.set_content("Forbidden", "text/plain");
        });
        server_.Get("/captcha", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<html><body>Please verify you are human to continue.</body></html>", "text/html");
        });
        server_.Get("/paywall", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<html><body><p>Subscribe to continue reading this article.</p></body></html>",
                            "text/html");
        });
        server_.Get("/login", [](const httplib::Request&, httplib::Response& res) {
            res.status = 401;
            res.set_content("login required", "text/plain");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    [[nodiscard]] std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }
    [[nodiscard]] int hits() const { return hits_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
};

}  // namespace

TEST_CASE("relative references resolve per RFC 3986") {
    CHECK(resolve_url("https://x.org/d/", "a.html") == "https://x.org/d/a.html");
    CHECK(resolve_url("https://x.org/d/e", "../f") == "https://x.org/f");
    CHECK(resolve_url("https://x.org/d/e?q", "?r") == "https://x.org/d/e?r");
    CHECK(resolve_url("https://x.org/d/e", "//y.org/z") == "https://y.org/z");
    CHECK(resolve_url("https://x.org/d/e", "g#frag") == "https://x.org/d/g");
    CHECK(resolve_url("http://a/b/c/d;p?q", "../../../g") == "http://a/g");
    CHECK_FALSE(resolve_url("https://x.org/", "mailto:someone@x.org").has_value());
    CHECK_FALSE(resolve_url("https://x.org/", "javascript:void(0)").has_value());
    CHECK(remove_dot_segments("/a/b/c/./../../g") == "/a/g");
}

TEST_CASE("plain text passes through as one body section") {
    const auto [text, sections] = extract_text_and_sections("just some text", MediaType::text);
    CHECK(text == "just some text");
    REQUIRE(sections.size() == 1);
    CHECK(sections[0].id == "body");
}

TEST_CASE("script and style content is removed") {
    const std::string html =
        "<html><head><style>.x{color:red}</style><script>var secret = 1;</script></head>"
        "<body><p>Visible words</p><script>alert('hidden')</script></body></html>";
    const auto [text, sections] = extract_text_and_sections(html, MediaType::html);
    CHECK(text.find("Visible words") != std::string::npos);
    CHECK(text.find("secret") == std::string::npos);
    CHECK(text.find("hidden") == std::string::npos);
    CHECK(text.find("color") == std::string::npos);
}

TEST_CASE("section texts concatenate to the plain text") {
    const std::string html =
        "<h1>One</h1><p>alpha &amp; beta</p><h2>Two</h2><p>gamma</p><ul><li>delta</li></ul><h2>Three</h2>";
    const auto [text, sections] = extract_text_and_sections(html, MediaType::html);
    std::string joined;
    for (const auto& s : sections) joined += s.text;
    CHECK(joined == text);
    CHECK(sections.size() >= 3);
    CHECK(text.find("alpha & beta") != std::string::npos);
}

TEST_CASE("malformed markup never throws") {
    for (const char* m : {"<p>unclosed <b>bold", "<<<>>>", "<a href=", "<script>never closed", "&#xZZZ; &bogus;"}) {
        CHECK_NOTHROW(extract_text_and_sections(m, MediaType::html));
    }
}

TEST_CASE("UniProt-like fixture word count") {
    const auto html = slurp(kData / "fixtures" / "hbb_uniprot.html");
    REQUIRE_FALSE(html.empty());
    const auto doc = extract_document(html, MediaType::html, "https://www.uniprot.org/uniprotkb/P68871/entry");
    const double hand_count = 557.0;
    const double got = static_cast<double>(whitespace_words(doc.text));
    CHECK(got >= hand_count * 0.95);
    CHECK(got <= hand_count * 1.05);
    CHECK(doc.text.find("cookie") == std::string::npos);
    CHECK(doc.links.size() >= 2);
}

TEST_CASE("document links are absolute and unique") {
    const std::string html =
        "<p><a href=\"a.html\">A</a> <a href=\"a.html#x\">A again</a> <a href=\"/b\">B</a>"
        " <a href=\"#top\">self</a> <a href=\"mailto:x@y\">mail</a></p>";
    const auto doc = extract_document(html, MediaType::html, "https://x.org/d/page");
    std::vector<std::string> uris;
    for (const auto& l : doc.links) uris.push_back(l.uri);
    CHECK(uris == std::vector<std::string>{"https://x.org/d/a.html", "https://x.org/b"});
    for (const auto& l : doc.links) {
        REQUIRE(l.anchor_span.has_value());
        CHECK(doc.text.substr(l.anchor_span->offset, l.anchor_span->length) == *l.anchor_text);
    }
}

TEST_CASE("no anchors, no links") {
    RawContent raw = make_raw_content({"https://x.org/"}, "<p>nothing linked here</p>", "text/html", 0);
    CHECK(extract_links(raw).empty());
}

TEST_CASE("only links in retained spans survive filtering") {
    const std::string html =
        "<p>Noise paragraph one <a href=\"n1\">n1</a>.</p>"
        "<p>The HBB gene causes sickle disease <a href=\"k1\">k1</a>.</p>"
        "<p>Unrelated weather report <a href=\"n2\">n2</a>.</p>"
        "<p>Another HBB variant page <a href=\"k2\">k2</a>.</p>"
        "<p>Stock prices today <a href=\"n3\">n3</a>.</p>";
    const RawContent raw = make_raw_content({"https://x.org/d/"}, html, "text/html", 0);
    REQUIRE(extract_links(raw).size() == 5);

    ExtractiveFilter filter(TokenPolicy::scoring());
    const auto filtered = filter.filter(Query::make("HBB gene"), raw);
    const auto links = extract_links(raw);
    const auto kept = extract_links(filtered, links);
    std::vector<std::string> uris;
    for (const auto& l : kept) uris.push_back(l.uri);
    CHECK(uris == std::vector<std::string>{"https://x.org/d/k1", "https://x.org/d/k2"});
}

TEST_CASE("segments without offsets match by anchor text") {
    FilteredContent f;
    f.segments.push_back({"see the k1 page for HBB", std::nullopt});
    std::vector<SourceRef> candidates = {{"https://x.org/k1", std::nullopt, 1, "k1 page", TextSpan{100, 7}},
                                         {"https://x.org/n1", std::nullopt, 1, "other", TextSpan{200, 5}}};
    const auto kept = extract_links(f, candidates);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].uri == "https://x.org/k1");
}

TEST_CASE("status mapping") {
    CHECK(classify_response(200, "<p>fine</p>") == FetchStatus::ok);
    CHECK(classify_response(403, "") == FetchStatus::blocked);
    CHECK(classify_response(429, "") == FetchStatus::blocked);
    CHECK(classify_response(401, "") == FetchStatus::paywalled);
    CHECK(classify_response(404, "") == FetchStatus::not_found);
    CHECK(classify_response(500, "") == FetchStatus::network_error);
    CHECK(classify_response(200, "Please complete the CAPTCHA") == FetchStatus::blocked);
    CHECK(classify_response(200, "Subscribe to continue reading") == FetchStatus::paywalled);
}

TEST_CASE("cache round-trip is byte identical") {
    TempDir dir("cache");
    FetchCache cache(dir.path);
    RawContent raw = make_raw_content({"https://x.org/p"}, "<h1>T</h1><p>Body β <a href=\"q\">q</a></p>",
                                      "text/html", 1700000000);
    cache.put(raw);
    cache.put(raw);
    const auto back = cache.get("https://x.org/p");
    REQUIRE(back.has_value());
    CHECK(*back == raw);
    CHECK(dump_pretty(*back) == dump_pretty(raw));

    FetchCache reopened(dir.path);
    CHECK(reopened.uris() == std::vector<std::string>{"https://x.org/p"});
    CHECK(*reopened.get("https://x.org/p") == raw);
    reopened.clear();
    CHECK(reopened.uris().empty());
    CHECK_FALSE(reopened.get("https://x.org/p").has_value());
}

TEST_CASE("cache tolerates concurrent writers of distinct keys") {
    TempDir dir("cache_mt");
    FetchCache cache(dir.path);
    std::vector<std::jthread> workers;
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&cache, t] {
            for (int i = 0; i < 10; ++i) {
                const std::string uri = "https://x.org/" + std::to_string(t) + "/" + std::to_string(i);
                cache.put(make_raw_content({uri}, "text " + uri, "text/plain", 0));
            }
        });
    }
    workers.clear();
    CHECK(cache.uris().size() == 80);
    CHECK(FetchCache(dir.path).uris().size() == 80);
}

TEST_CASE("live fetch over loopback: ok, blocked, paywalled, cache hit") {
    LocalServer server;
    TempDir dir("fetch");
    auto cache = std::make_shared<FetchCache>(dir.path);

    {
        WebProvider provider(quick_policy(), cache);
        const auto ok = provider.resolve({server.url("/ok.html")});
        CHECK(ok.status == FetchStatus::ok);
        CHECK(ok.text.find("beta globin") != std::string::npos);
        REQUIRE(ok.links.size() == 1);
        CHECK(ok.links[0].uri == server.url("/next.html"));
        CHECK(ok.links[0].layer == 1);

        const auto blocked = provider.resolve({server.url("/forbidden")});
        CHECK(blocked.status == FetchStatus::blocked);
        CHECK(blocked.text.empty());
        CHECK(provider.resolve({server.url("/captcha")}).status == FetchStatus::blocked);
        CHECK(provider.resolve({server.url("/paywall")}).status == FetchStatus::paywalled);
        CHECK(provider.resolve({server.url("/login")}).status == FetchStatus::paywalled);
        CHECK(provider.network_calls() == 5);
    }
    const int hits = server.hits();
    WebProvider again(quick_policy(), cache);
    const auto first = cache->get(server.url("/ok.html"));
    const auto replay = again.resolve({server.url("/ok.html")});
    CHECK(again.network_calls() == 0);
    CHECK(server.hits() == hits);
    REQUIRE(first.has_value());
    CHECK(replay == *first);
}

TEST_CASE("unreachable host is a network error, not an exception") {
    TempDir dir("fetch_err");
    WebProvider provider(quick_policy(), std::make_shared<FetchCache>(dir.path));
    const auto raw = provider.resolve({"http://127.0.0.1:1/nothing"});
    CHECK(raw.status == FetchStatus::network_error);
    CHECK(raw.text.empty());
}

TEST_CASE("file locators read the local filesystem") {
    TempDir dir("fetch_file");
    WebProvider provider(quick_policy(), nullptr);
    const auto fixture = fs::absolute(kData / "fixtures" / "hbb_uniprot.html");
    const auto raw = provider.resolve({"file://" + fixture.string()});
    CHECK(raw.status == FetchStatus::ok);
    CHECK_FALSE(raw.text.empty());
    CHECK(provider.resolve({"file:///no/such/file.html"}).status == FetchStatus::not_found);
}

TEST_CASE("bundled seed list") {
    const auto seeds = seed_sources(Query::make("HBB diseases"), kData / "hbb_seeds.txt");
    CHECK(seeds.size() == 24);
    for (const auto& s : seeds) {
        CHECK(s.layer == 0);
        CHECK_FALSE(s.parent.has_value());
    }
}

TEST_CASE("seed file validation and dedup") {
    TempDir dir("seeds");
    const auto empty = dir.path / "empty.txt";
    std::ofstream(empty) << "# only a comment\n\n";
    CHECK_THROWS_AS(seed_sources(Query::make("q"), empty), ConfigError);
    CHECK_THROWS_AS(seed_sources(Query::make("q"), dir.path / "missing.txt"), ConfigError);

    const auto rel = dir.path / "rel.txt";
    std::ofstream(rel) << "relative/path.html\n";
    CHECK_THROWS_AS(seed_sources(Query::make("q"), rel), ConfigError);

    const auto dup = dir.path / "dup.txt";
    std::ofstream(dup) << "https://b.org/\nhttps://a.org/\nhttps://b.org/\n";
    const auto seeds = seed_sources(Query::make("q"), dup);
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0].uri == "https://b.org/");
    CHECK(seeds[1].uri == "https://a.org/");
}

TEST_CASE("fetch policy invariants") {
    FetchPolicy p;
    CHECK_NOTHROW(p.validate());
    p.timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = FetchPolicy{};
    p.max_bytes = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

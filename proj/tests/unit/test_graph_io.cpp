#include "evograph/error.hpp"
#include "evograph/graph_io.hpp"
#include "evograph/simenv.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace evograph;

namespace {

ArtefactGraph fixture() {
    auto [g, env] = generate_estate(estate_preset("minimal"), 17);
    g.lineage.push_back({2, "DS", true, {{"freshness", 0.875}}});
    g.attributes["note"] = std::string("multi word \"quoted\" value");
    return g;
}

}  // namespace

TEST(GraphIo, RoundTripIsIdentity) {
    const auto g = fixture();
    EXPECT_EQ(deserialize(serialize(g)), g);
    const auto [reference, env] = generate_estate(estate_preset("reference"), 42);
    EXPECT_EQ(deserialize(serialize(reference)), reference);
}

TEST(GraphIo, CanonicalBytesAreStable) {
    const auto g = fixture();
    const auto once = serialize(g);
    EXPECT_EQ(serialize(g), once);
    EXPECT_EQ(serialize(deserialize(once)), once);
}

TEST(GraphIo, InsertionOrderDoesNotChangeBytes) {
    auto a = ArtefactGraph(2);
    auto b = ArtefactGraph(2);
    ArtefactNode x{"x", NodeType::code, Eigen::Vector2d(0.5, -0.25), {}, false, {}};
    ArtefactNode y{"y", NodeType::doc, Eigen::Vector2d(1.0, 0.0), {}, true, {}};
    a.insert_node(x);
    a.insert_node(y);
    b.insert_node(y);
    b.insert_node(x);
    a.insert_edge({"y", "x", EdgeType::documents});
    a.insert_edge({"x", "y", EdgeType::calls});
    b.insert_edge({"x", "y", EdgeType::calls});
    b.insert_edge({"y", "x", EdgeType::documents});
    EXPECT_EQ(serialize(a), serialize(b));
}

TEST(GraphIo, UnknownNodeTypeIsMalformed) {
    auto g = ArtefactGraph(2);
    g.insert_node({"w", NodeType::code, Eigen::Vector2d(0, 0), {}, false, {}});
    auto text = serialize(g);
    const auto pos = text.find("\"code\"");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 6, "\"widget\"");
    try {
        (void)deserialize(text);
        FAIL() << "widget accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedInput);
        EXPECT_NE(std::string(e.what()).find("widget"), std::string::npos);
    }
}

TEST(GraphIo, GarbageIsMalformed) {
    for (const char* bad : {"", "{", "[]", "{\"version\": 1}", "not json"}) {
        try {
            (void)deserialize(bad);
            ADD_FAILURE() << "accepted: " << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::MalformedInput) << bad;
        }
    }
}

TEST(GraphIo, SaveAndLoadFile) {
    const auto g = fixture();
    const auto path = std::filesystem::temp_directory_path() / "evograph_graph_io_test.json";
    save_graph(g, path.string());
    EXPECT_EQ(load_graph(path.string()), g);
    std::filesystem::remove(path);
    try {
        (void)load_graph(path.string());
        FAIL() << "missing file loaded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedInput);
    }
}

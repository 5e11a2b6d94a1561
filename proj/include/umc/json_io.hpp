#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "umc/contraction.hpp"
#include "umc/ladder.hpp"
#include "umc/rtree.hpp"
#include "umc/space.hpp"
#include "umc/version.hpp"

namespace umc {

/// nlohmann::json with the default std::map object backing, so object keys
/// always serialize sorted: encoding is canonical by construction.
using Json = nlohmann::json;

/// Parse- or shape-stage document error, carrying a JSON-pointer-ish path.
struct DocumentError : std::runtime_error {
    std::string where;

    DocumentError(std::string where_, const std::string& what_)
        : std::runtime_error(where_ + ": " + what_), where(std::move(where_)) {}
};

// ============================================================================
// Low-level helpers
// ============================================================================

inline Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw DocumentError("$", e.what());
    }
}

/// Canonical text form used everywhere documents are written or digested.
inline std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string content_digest(const Json& j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(dump_canonical(j))));
    return buf;
}

namespace detail {

inline const Json& member(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw DocumentError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw DocumentError(path, std::string("missing field \"") + key + "\"");
    return *it;
}

inline void expect_fields(const Json& j, std::initializer_list<const char*> keys,
                          const std::string& path) {
    if (!j.is_object()) throw DocumentError(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw DocumentError(path, "unknown field \"" + key + "\"");
    }
}

inline int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw DocumentError(path, "expected an integer");
    return j.get<int>();
}

inline std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw DocumentError(path, "expected a string");
    return j.get<std::string>();
}

inline DistanceLadder ladder_from(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw DocumentError(path, "expected a nonempty array");
    std::vector<Rational> values;
    values.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        try {
            values.push_back(parse_rational(as_string(j[i], at)));
        } catch (const std::invalid_argument& e) {
            throw DocumentError(at, e.what());
        }
    }
    try {
        return DistanceLadder(std::move(values));
    } catch (const std::invalid_argument& e) {
        throw DocumentError(path, e.what());
    }
}

inline Json ladder_to(const DistanceLadder& ladder) {
    Json out = Json::array();
    for (int j = 0; j < ladder.size(); ++j)
        out.push_back(format_rational(ladder.value_at(j)));
    return out;
}

}  // namespace detail

// ============================================================================
// SpaceDocument
// ============================================================================

/// The pieces of a space document before metric validation. Shape, rational
/// syntax, and index ranges are enforced here; the metric axioms are the
/// caller's job via validate_ultrametric.
struct SpaceParts {
    std::vector<std::string> labels;
    DistanceLadder ladder;
    std::vector<std::vector<int>> rows;
};

inline Json encode_space_document(const FiniteUltrametricSpace& space) {
    Json doc;
    doc["ladder"] = detail::ladder_to(space.ladder());
    Json points = Json::array();
    for (int i = 0; i < space.size(); ++i) points.push_back(space.label(i));
    doc["points"] = std::move(points);
    Json dist = Json::array();
    for (int i = 0; i < space.size(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < space.size(); ++j) row.push_back(space.dist(i, j).idx);
        dist.push_back(std::move(row));
    }
    doc["dist"] = std::move(dist);
    return doc;
}

inline SpaceParts decode_space_document(const Json& doc) {
    detail::expect_fields(doc, {"dist", "ladder", "points"}, "$");
    DistanceLadder ladder = detail::ladder_from(detail::member(doc, "ladder", "$"), "$.ladder");

    const Json& points = detail::member(doc, "points", "$");
    if (!points.is_array() || points.empty())
        throw DocumentError("$.points", "expected a nonempty array");
    std::vector<std::string> labels;
    labels.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        labels.push_back(detail::as_string(points[i], "$.points[" + std::to_string(i) + "]"));

    const Json& dist = detail::member(doc, "dist", "$");
    if (!dist.is_array() || dist.size() != labels.size())
        throw DocumentError("$.dist", "expected one row per point");
    std::vector<std::vector<int>> rows;
    rows.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const std::string rp = "$.dist[" + std::to_string(i) + "]";
        if (!dist[i].is_array() || dist[i].size() != labels.size())
            throw DocumentError(rp, "expected one entry per point");
        std::vector<int> row;
        row.reserve(labels.size());
        for (std::size_t j = 0; j < dist[i].size(); ++j) {
            const std::string ep = rp + "[" + std::to_string(j) + "]";
            const int e = detail::as_int(dist[i][j], ep);
            if (e < -1 || e >= ladder.size())
                throw DocumentError(ep, "distance index " + std::to_string(e) +
                                            " outside -1.." + std::to_string(ladder.size() - 1));
            row.push_back(e);
        }
        rows.push_back(std::move(row));
    }
    return SpaceParts{std::move(labels), std::move(ladder), std::move(rows)};
}

// ============================================================================
// TreeDocument
// ============================================================================

namespace detail {

inline Json tree_node_to(const RTree& tree, int lo, int hi, int pos) {
    Json node;
    node["level_index"] = pos - 1;
    Json children = Json::object();
    if (pos < tree.depth()) {
        int i = lo;
        while (i < hi) {
            const int label = tree.leaf(i)[static_cast<std::size_t>(pos)];
            int j = i;
            while (j < hi && tree.leaf(j)[static_cast<std::size_t>(pos)] == label) ++j;
            children[std::to_string(label)] = tree_node_to(tree, i, j, pos + 1);
            i = j;
        }
    }
    node["children"] = std::move(children);
    return node;
}

inline void tree_node_from(const Json& node, NodePath& prefix, std::vector<NodePath>& leaves,
                           const std::string& path) {
    expect_fields(node, {"children", "level_index"}, path);
    const int level = as_int(member(node, "level_index", path), path + ".level_index");
    if (level != static_cast<int>(prefix.size()) - 1)
        throw DocumentError(path + ".level_index",
                            "expected " + std::to_string(static_cast<int>(prefix.size()) - 1) +
                                ", found " + std::to_string(level));
    const Json& children = member(node, "children", path);
    if (!children.is_object()) throw DocumentError(path + ".children", "expected an object");
    if (children.empty()) {
        if (prefix.empty()) throw DocumentError(path, "root has no children");
        leaves.push_back(prefix);
        return;
    }
    for (const auto& [key, child] : children.items()) {
        int label = -1;
        try {
            std::size_t used = 0;
            label = std::stoi(key, &used);
            if (used != key.size() || label < 0 || std::to_string(label) != key) label = -1;
        } catch (const std::exception&) {
            label = -1;
        }
        const std::string cp = path + ".children[\"" + key + "\"]";
        if (label < 0) throw DocumentError(cp, "child label must be a nonnegative integer");
        prefix.push_back(label);
        tree_node_from(child, prefix, leaves, cp);
        prefix.pop_back();
    }
}

}  // namespace detail

inline Json encode_tree_document(const RTree& tree) {
    Json doc;
    doc["ladder"] = detail::ladder_to(tree.ladder());
    doc["root"] = detail::tree_node_to(tree, 0, tree.leaf_count(), 0);
    return doc;
}

inline RTree decode_tree_document(const Json& doc) {
    detail::expect_fields(doc, {"ladder", "root"}, "$");
    DistanceLadder ladder = detail::ladder_from(detail::member(doc, "ladder", "$"), "$.ladder");
    std::vector<NodePath> leaves;
    NodePath prefix;
    detail::tree_node_from(detail::member(doc, "root", "$"), prefix, leaves, "$.root");
    try {
        return RTree::from_leaves(std::move(ladder), std::move(leaves));
    } catch (const MalformedInput& e) {
        throw DocumentError("$.root", e.what());
    }
}

// ============================================================================
// MapDocument
// ============================================================================

inline Json encode_map_document(const SelfMap& f) {
    Json doc;
    doc["targets"] = f.target;
    return doc;
}

/// Raw target table; totality against a particular space is checked by
/// SelfMap::checked at the point of use.
inline std::vector<int> decode_map_document(const Json& doc) {
    detail::expect_fields(doc, {"targets"}, "$");
    const Json& targets = detail::member(doc, "targets", "$");
    if (!targets.is_array() || targets.empty())
        throw DocumentError("$.targets", "expected a nonempty array");
    std::vector<int> out;
    out.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i)
        out.push_back(detail::as_int(targets[i], "$.targets[" + std::to_string(i) + "]"));
    return out;
}

// ============================================================================
// CertificateDocument
// ============================================================================

struct CertificateDocument {
    DeficiencyCertificate certificate;
    std::string space_digest;
    std::string map_digest;
    std::string tool_name;
    std::string tool_version;
};

inline Json encode_certificate_document(const DeficiencyCertificate& cert,
                                        const DistanceLadder& ladder,
                                        const std::string& space_digest,
                                        const std::string& map_digest) {
    Json body;
    body["coarse_index"] = cert.coarse_index;
    body["coarse_value"] = ladder.format(Dist(cert.coarse_index));
    body["fine_index"] = cert.fine_level.idx;
    body["fine_value"] = ladder.format(cert.fine_level);
    body["coarse_count"] = cert.coarse_count;
    body["fine_count"] = cert.fine_count;
    body["max_image_diameter_index"] = cert.max_image_diameter.idx;
    body["max_image_diameter_value"] = ladder.format(cert.max_image_diameter);
    Json enclosures = Json::array();
    for (const auto& [from, into] : cert.enclosures) {
        Json e;
        e["ball"] = from;
        e["image_in"] = into;
        enclosures.push_back(std::move(e));
    }
    body["enclosures"] = std::move(enclosures);
    Json missed = Json::array();
    for (const MissedBall& mb : cert.missed) {
        Json m;
        m["ball"] = mb.representative;
        m["witness"] = mb.witness;
        missed.push_back(std::move(m));
    }
    body["missed"] = std::move(missed);

    Json doc;
    doc["certificate"] = std::move(body);
    doc["inputs"] = Json{{"map_digest", map_digest}, {"space_digest", space_digest}};
    doc["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
    return doc;
}

inline CertificateDocument decode_certificate_document(const Json& doc) {
    detail::expect_fields(doc, {"certificate", "inputs", "tool"}, "$");
    const Json& body = detail::member(doc, "certificate", "$");
    detail::expect_fields(body,
                          {"coarse_index", "coarse_value", "fine_index", "fine_value",
                           "coarse_count", "fine_count", "max_image_diameter_index",
                           "max_image_diameter_value", "enclosures", "missed"},
                          "$.certificate");
    CertificateDocument out;
    DeficiencyCertificate& c = out.certificate;
    c.coarse_index = detail::as_int(detail::member(body, "coarse_index", "$.certificate"),
                                    "$.certificate.coarse_index");
    c.fine_level = Dist(detail::as_int(detail::member(body, "fine_index", "$.certificate"),
                                       "$.certificate.fine_index"));
    c.coarse_count = detail::as_int(detail::member(body, "coarse_count", "$.certificate"),
                                    "$.certificate.coarse_count");
    c.fine_count = detail::as_int(detail::member(body, "fine_count", "$.certificate"),
                                  "$.certificate.fine_count");
    c.max_image_diameter =
        Dist(detail::as_int(detail::member(body, "max_image_diameter_index", "$.certificate"),
                            "$.certificate.max_image_diameter_index"));
    for (const char* key : {"coarse_value", "fine_value", "max_image_diameter_value"}) {
        const std::string path = std::string("$.certificate.") + key;
        try {
            parse_rational(detail::as_string(detail::member(body, key, "$.certificate"), path));
        } catch (const std::invalid_argument& e) {
            throw DocumentError(path, e.what());
        }
    }
    const Json& enclosures = detail::member(body, "enclosures", "$.certificate");
    if (!enclosures.is_array())
        throw DocumentError("$.certificate.enclosures", "expected an array");
    for (std::size_t i = 0; i < enclosures.size(); ++i) {
        const std::string ep = "$.certificate.enclosures[" + std::to_string(i) + "]";
        detail::expect_fields(enclosures[i], {"ball", "image_in"}, ep);
        c.enclosures.emplace_back(
            detail::as_int(detail::member(enclosures[i], "ball", ep), ep + ".ball"),
            detail::as_int(detail::member(enclosures[i], "image_in", ep), ep + ".image_in"));
    }
    const Json& missed = detail::member(body, "missed", "$.certificate");
    if (!missed.is_array() || missed.empty())
        throw DocumentError("$.certificate.missed", "expected a nonempty array");
    for (std::size_t i = 0; i < missed.size(); ++i) {
        const std::string mp = "$.certificate.missed[" + std::to_string(i) + "]";
        detail::expect_fields(missed[i], {"ball", "witness"}, mp);
        c.missed.push_back(
            MissedBall{detail::as_int(detail::member(missed[i], "ball", mp), mp + ".ball"),
                       detail::as_int(detail::member(missed[i], "witness", mp), mp + ".witness")});
    }
    const Json& inputs = detail::member(doc, "inputs", "$");
    detail::expect_fields(inputs, {"map_digest", "space_digest"}, "$.inputs");
    out.map_digest =
        detail::as_string(detail::member(inputs, "map_digest", "$.inputs"), "$.inputs.map_digest");
    out.space_digest = detail::as_string(detail::member(inputs, "space_digest", "$.inputs"),
                                         "$.inputs.space_digest");
    const Json& tool = detail::member(doc, "tool", "$");
    detail::expect_fields(tool, {"name", "version"}, "$.tool");
    out.tool_name = detail::as_string(detail::member(tool, "name", "$.tool"), "$.tool.name");
    out.tool_version =
        detail::as_string(detail::member(tool, "version", "$.tool"), "$.tool.version");
    return out;
}

}  // namespace umc

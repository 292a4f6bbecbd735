#include "fffaa/mesh.hpp"

#include "fffaa/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <tuple>

namespace fffaa {

namespace {

constexpr std::size_t kBinaryHeader = 80;
constexpr std::size_t kBinaryRecord = 50;

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

// Merges bit-identical vertex coordinates while building the indexed mesh.
class MeshBuilder {
public:
    void add(const Vec3& a, const Vec3& b, const Vec3& c, MeshLoadReport& report) {
        ++report.facets_read;
        if (!finite(a) || !finite(b) || !finite(c)) {
            ++report.nonfinite_dropped;
            return;
        }
        if (triangle_area(a, b, c) <= kDegenerateArea) {
            ++report.degenerate_dropped;
            return;
        }
        std::array<std::uint32_t, 3> tri{index_of(a), index_of(b), index_of(c)};
        mesh_.triangles.push_back(tri);
        Vec3 n = cross(b - a, c - a);
        mesh_.normals.push_back(n * (1.0 / norm(n)));
    }

    TriangleMesh take() { return std::move(mesh_); }

private:
    std::uint32_t index_of(const Vec3& v) {
        auto key = std::make_tuple(v.x, v.y, v.z);
        auto [it, inserted] = lookup_.try_emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
        if (inserted) mesh_.vertices.push_back(v);
        return it->second;
    }

    TriangleMesh mesh_;
    std::map<std::tuple<double, double, double>, std::uint32_t> lookup_;
};

template <typename T>
T read_le(const char* p) {
    T value;
    std::memcpy(&value, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&value);
        std::reverse(b, b + sizeof(T));
    }
    return value;
}

template <typename T>
void write_le(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.append(buf, sizeof(T));
}

LoadedMesh load_binary(std::string_view bytes) {
    if (bytes.size() < kBinaryHeader + 4)
        throw ParseError("stl", "binary STL shorter than its 84-byte header", bytes.size());
    const auto count = read_le<std::uint32_t>(bytes.data() + kBinaryHeader);
    const std::size_t needed = kBinaryHeader + 4 + static_cast<std::size_t>(count) * kBinaryRecord;
    if (bytes.size() < needed) {
        std::size_t complete = (bytes.size() - kBinaryHeader - 4) / kBinaryRecord;
        throw ParseError("stl", "binary STL truncated: declared " + std::to_string(count) + " facets",
                         kBinaryHeader + 4 + complete * kBinaryRecord);
    }
    LoadedMesh out;
    MeshBuilder builder;
    for (std::uint32_t i = 0; i < count; ++i) {
        const char* rec = bytes.data() + kBinaryHeader + 4 + static_cast<std::size_t>(i) * kBinaryRecord;
        Vec3 v[3];
        for (int k = 0; k < 3; ++k) {
            const char* p = rec + 12 + 12 * k;
            v[k] = {read_le<float>(p), read_le<float>(p + 4), read_le<float>(p + 8)};
        }
        builder.add(v[0], v[1], v[2], out.report);
    }
    out.mesh = builder.take();
    return out;
}

class AsciiReader {
public:
    explicit AsciiReader(std::string_view text) : text_(text) {}

    std::string_view token() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        last_ = start;
        return text_.substr(start, pos_ - start);
    }

    void expect(std::string_view word) {
        auto t = token();
        if (t != word) throw ParseError("stl", "expected '" + std::string(word) + "', got '" + std::string(t) + "'", last_);
    }

    double number() {
        auto t = token();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
        if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
            throw ParseError("stl", "invalid number '" + std::string(t) + "'", last_);
        return value;
    }

    void skip_line() {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    std::size_t position() const { return pos_; }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t last_ = 0;
};

LoadedMesh load_ascii(std::string_view text) {
    AsciiReader in(text);
    in.expect("solid");
    in.skip_line();
    LoadedMesh out;
    MeshBuilder builder;
    bool closed = false;
    while (!in.at_end()) {
        auto kw = in.token();
        if (kw == "endsolid") {
            closed = true;
            break;
        }
        if (kw != "facet") throw ParseError("stl", "expected 'facet', got '" + std::string(kw) + "'", in.position() - kw.size());
        in.expect("normal");
        for (int k = 0; k < 3; ++k) in.number();
        in.expect("outer");
        in.expect("loop");
        Vec3 v[3];
        for (auto& p : v) {
            in.expect("vertex");
            p.x = in.number();
            p.y = in.number();
            p.z = in.number();
        }
        in.expect("endloop");
        in.expect("endfacet");
        builder.add(v[0], v[1], v[2], out.report);
    }
    if (!closed) throw ParseError("stl", "ASCII STL missing 'endsolid'", in.position());
    out.mesh = builder.take();
    return out;
}

} // namespace

bool TriangleMesh::add_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    if (!finite(a) || !finite(b) || !finite(c) || triangle_area(a, b, c) <= kDegenerateArea) return false;
    auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), {a, b, c});
    triangles.push_back({base, base + 1, base + 2});
    Vec3 n = cross(b - a, c - a);
    normals.push_back(n * (1.0 / norm(n)));
    return true;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

StlFormat detect_stl_format(std::string_view bytes) {
    if (bytes.size() >= kBinaryHeader + 4) {
        auto count = read_le<std::uint32_t>(bytes.data() + kBinaryHeader);
        if (bytes.size() == kBinaryHeader + 4 + static_cast<std::size_t>(count) * kBinaryRecord) return StlFormat::binary;
    }
    std::size_t i = 0;
    while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) ++i;
    return bytes.substr(i, 5) == "solid" ? StlFormat::ascii : StlFormat::binary;
}

LoadedMesh load_mesh(std::string_view bytes, StlFormat format) {
    LoadedMesh out = format == StlFormat::binary ? load_binary(bytes) : load_ascii(bytes);
    if (out.mesh.empty()) throw GeometryError("mesh has no usable triangles after filtering");
    return out;
}

LoadedMesh load_mesh_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open mesh file " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_mesh(bytes, detect_stl_format(bytes));
}

std::string write_stl(const TriangleMesh& mesh, StlFormat format, std::string_view name) {
    std::string out;
    if (format == StlFormat::binary) {
        std::string header(kBinaryHeader, ' ');
        std::copy_n(name.begin(), std::min(name.size(), kBinaryHeader), header.begin());
        out += header;
        write_le(out, static_cast<std::uint32_t>(mesh.size()));
        for (std::size_t t = 0; t < mesh.size(); ++t) {
            const Vec3& n = mesh.normals[t];
            for (double c : {n.x, n.y, n.z}) write_le(out, static_cast<float>(c));
            for (int k = 0; k < 3; ++k) {
                Vec3 p = mesh.corner(t, k);
                for (double c : {p.x, p.y, p.z}) write_le(out, static_cast<float>(c));
            }
            write_le(out, std::uint16_t{0});
        }
        return out;
    }
    std::ostringstream s;
    s.precision(17);
    s << "solid " << name << "\n";
    for (std::size_t t = 0; t < mesh.size(); ++t) {
        const Vec3& n = mesh.normals[t];
        s << "  facet normal " << n.x << ' ' << n.y << ' ' << n.z << "\n    outer loop\n";
        for (int k = 0; k < 3; ++k) {
            Vec3 p = mesh.corner(t, k);
            s << "      vertex " << p.x << ' ' << p.y << ' ' << p.z << "\n";
        }
        s << "    endloop\n  endfacet\n";
    }
    s << "endsolid " << name << "\n";
    return s.str();
}

double mesh_volume(const TriangleMesh& mesh) {
    double v = 0.0;
    for (std::size_t t = 0; t < mesh.size(); ++t)
        v += dot(mesh.corner(t, 0), cross(mesh.corner(t, 1), mesh.corner(t, 2)));
    return v / 6.0;
}

bool is_closed(const TriangleMesh& mesh) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            auto a = tri[k], b = tri[(k + 1) % 3];
            ++edges[{std::min(a, b), std::max(a, b)}];
        }
    return std::all_of(edges.begin(), edges.end(), [](const auto& e) { return e.second == 2; });
}

} // namespace fffaa

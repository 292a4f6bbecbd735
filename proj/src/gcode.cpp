#include "fffaa/gcode.hpp"

#include "fffaa/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace fffaa {

namespace {

struct Word {
    char letter = 0;
    double value = 0.0;
};

// Code part of a line split into command and words. Only motion-related
// commands get their words parsed; anything else stays opaque.
struct Command {
    char kind = 0; // 'G', 'M', 'T' or 0 for comments and blank lines
    int number = -1;
    std::vector<Word> words;
    std::string extra;
    std::string comment;
    std::string order;

    bool is(char k, int n) const { return kind == k && number == n; }
    bool has(char letter) const { return order.find(letter) != std::string::npos; }
    double get(char letter) const {
        for (const auto& w : words)
            if (w.letter == letter) return w.value;
        return 0.0;
    }
};

std::string_view trim_right(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    return trim_right(s);
}

bool number_char(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+'; }

std::optional<double> to_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool parsed_words(const Command& c) {
    return c.is('G', 0) || c.is('G', 1) || c.is('G', 28) || c.is('G', 92);
}

Command parse_command(std::string_view line, std::size_t line_no) {
    Command c;
    std::string_view code = line;
    if (auto semi = line.find(';'); semi != std::string_view::npos) code = line.substr(0, semi);
    code = trim_right(code);
    c.comment = std::string(line.substr(code.size()));

    std::size_t i = 0;
    auto skip = [&] {
        while (i < code.size() && std::isspace(static_cast<unsigned char>(code[i]))) ++i;
    };
    skip();
    if (i >= code.size()) return c;
    char head = static_cast<char>(std::toupper(static_cast<unsigned char>(code[i])));
    if (head != 'G' && head != 'M' && head != 'T') return c;
    std::size_t j = i + 1;
    while (j < code.size() && std::isdigit(static_cast<unsigned char>(code[j]))) ++j;
    if (j == i + 1) return c;
    c.kind = head;
    std::from_chars(code.data() + i + 1, code.data() + j, c.number);
    if (j < code.size() && code[j] == '.') return Command{}; // subcodes such as G29.1 are opaque
    i = j;
    if (!parsed_words(c)) return c;

    const bool strict = c.is('G', 0) || c.is('G', 1);
    while (true) {
        skip();
        if (i >= code.size()) break;
        if (code[i] == '(') {
            auto close = code.find(')', i);
            std::size_t end = close == std::string_view::npos ? code.size() : close + 1;
            c.extra += ' ';
            c.extra += code.substr(i, end - i);
            i = end;
            continue;
        }
        char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(code[i])));
        std::size_t start = i++;
        while (i < code.size() && number_char(code[i])) ++i;
        auto value = to_double(code.substr(start + 1, i - start - 1));
        const bool axis = letter == 'X' || letter == 'Y' || letter == 'Z' || letter == 'E' || letter == 'F';
        if (!axis) {
            while (i < code.size() && !std::isspace(static_cast<unsigned char>(code[i]))) ++i;
            c.extra += ' ';
            c.extra += code.substr(start, i - start);
            continue;
        }
        if (!value) {
            if (strict || i - start > 1)
                throw ParseError("gcode", "invalid value for word '" + std::string(1, letter) + "'", line_no);
            value = 0.0; // bare axis letter, as in "G28 X"
        }
        if (c.has(letter)) throw ParseError("gcode", "repeated word '" + std::string(1, letter) + "'", line_no);
        if (letter == 'F' && strict && *value <= 0.0) throw ParseError("gcode", "feedrate must be positive", line_no);
        c.words.push_back({letter, *value});
        c.order += letter;
    }
    return c;
}

bool is_layer_marker(std::string_view line) {
    auto t = trim(line);
    return t.starts_with(";LAYER:") || t == ";LAYER_CHANGE";
}

std::optional<std::string_view> type_comment(std::string_view line) {
    auto t = trim(line);
    if (!t.starts_with(";TYPE:")) return std::nullopt;
    return t.substr(6);
}

// Modal machine state shared by the parser and the emitter.
struct MachineState {
    Vec3 pos;
    double e_abs = 0.0;
    bool e_relative = false;
    bool axis_relative = false;
    double feed = 0.0; // mm/s

    // Applies a non-motion command. Returns true when the head position
    // changed or became unknown.
    bool apply(const Command& c) {
        if (c.is('M', 82)) e_relative = false;
        else if (c.is('M', 83)) e_relative = true;
        else if (c.is('G', 90)) axis_relative = e_relative = false;
        else if (c.is('G', 91)) axis_relative = e_relative = true;
        else if (c.is('G', 92)) {
            bool moved = false;
            for (const auto& w : c.words) {
                if (w.letter == 'X') pos.x = w.value, moved = true;
                if (w.letter == 'Y') pos.y = w.value, moved = true;
                if (w.letter == 'Z') pos.z = w.value, moved = true;
                if (w.letter == 'E') e_abs = w.value;
            }
            return moved;
        } else if (c.is('G', 28)) {
            bool all = !c.has('X') && !c.has('Y') && !c.has('Z');
            if (all || c.has('X')) pos.x = 0.0;
            if (all || c.has('Y')) pos.y = 0.0;
            if (all || c.has('Z')) pos.z = 0.0;
            return true;
        } else if ((c.is('G', 0) || c.is('G', 1)) && c.order == "F") {
            feed = c.get('F') / 60.0;
        }
        return false;
    }
};

bool feed_only(const Command& c) { return (c.is('G', 0) || c.is('G', 1)) && c.order == "F"; }

std::string eol_of(std::string_view text) {
    auto nl = text.find('\n');
    if (nl != std::string_view::npos && nl > 0 && text[nl - 1] == '\r') return "\r\n";
    return "\n";
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    PrintProgram run() {
        prog_.eol = eol_of(text_);
        prog_.has_layer_markers = scan_markers();
        out_ = &prog_.prologue;
        std::size_t pos = 0, line_no = 0;
        while (pos < text_.size()) {
            auto nl = text_.find('\n', pos);
            std::string_view line, eol;
            if (nl == std::string_view::npos) {
                line = text_.substr(pos);
                pos = text_.size();
            } else {
                line = text_.substr(pos, nl - pos);
                eol = "\n";
                if (!line.empty() && line.back() == '\r') {
                    line.remove_suffix(1);
                    eol = "\r\n";
                }
                pos = nl + 1;
            }
            ++line_no;
            handle(line, eol, line_no);
        }
        finish();
        return std::move(prog_);
    }

private:
    bool scan_markers() const {
        std::size_t pos = 0;
        while (pos < text_.size()) {
            auto nl = text_.find('\n', pos);
            auto line = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            if (is_layer_marker(line)) return true;
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        return false;
    }

    Layer* layer() { return prog_.layers.empty() || out_ == &prog_.prologue ? nullptr : &prog_.layers.back(); }

    void flush_pending() {
        for (auto& r : pending_) out_->push_back(std::move(r));
        pending_.clear();
    }

    void close_path() {
        flush_pending();
        open_ = false;
    }

    void begin_layer() {
        Layer l;
        l.index = static_cast<int>(prog_.layers.size());
        l.z = std::nan("");
        prog_.layers.push_back(std::move(l));
        out_ = &prog_.layers.back().items;
        last_z_move_ = std::nullopt;
    }

    void handle(std::string_view line, std::string_view eol, std::size_t line_no) {
        Command c = parse_command(line, line_no);
        if (c.kind == 'G' && (c.number == 2 || c.number == 3))
            throw ParseError("gcode", "arc moves (G2/G3) are not supported; linearize the input", line_no);
        RawLine raw{std::string(line), std::string(eol)};

        if ((c.is('G', 0) || c.is('G', 1)) && !feed_only(c) && !c.order.empty()) {
            move(c, std::move(raw), line_no);
            return;
        }
        if (prog_.has_layer_markers && is_layer_marker(line)) {
            close_path();
            begin_layer();
            out_->push_back(std::move(raw));
            return;
        }
        if (auto t = type_comment(line)) {
            close_path();
            kind_ = kind_from_comment(*t);
            out_->push_back(std::move(raw));
            return;
        }
        bool moved = st_.apply(c);
        if (moved || c.is('G', 90) || c.is('G', 91)) close_path();
        if (open_) pending_.push_back(std::move(raw));
        else out_->push_back(std::move(raw));
    }

    void move(const Command& c, RawLine raw, std::size_t line_no) {
        Vec3 from = st_.pos;
        Vec3 to = from;
        for (const auto& w : c.words) {
            double* axis = w.letter == 'X' ? &to.x : w.letter == 'Y' ? &to.y : w.letter == 'Z' ? &to.z : nullptr;
            if (axis) *axis = st_.axis_relative ? *axis + w.value : w.value;
        }
        const bool has_e = c.has('E');
        double de = 0.0;
        if (has_e) {
            double v = c.get('E');
            de = st_.e_relative ? v : v - st_.e_abs;
            st_.e_abs = st_.e_relative ? st_.e_abs + v : v;
        }
        if (c.has('F')) st_.feed = c.get('F') / 60.0;
        st_.pos = to;

        MoveSource src;
        src.g = c.number;
        src.order = c.order;
        src.extra = c.extra;
        src.comment = c.comment;
        src.eol = raw.eol;
        src.text = raw.text;
        for (const auto& w : c.words) src.values.push_back(w.value);

        const double xy = std::hypot(to.x - from.x, to.y - from.y);
        const bool deposit = !st_.axis_relative && has_e && de > 0.0 && xy > kDuplicateTol &&
                             (layer() || !prog_.has_layer_markers);
        if (!deposit) {
            close_path();
            Motion m;
            m.src = std::move(src);
            m.text = std::move(raw.text);
            m.verbatim = st_.axis_relative;
            m.target = to;
            m.has_e = has_e;
            m.e = de;
            m.f = st_.feed;
            m.moves_xy = xy > kDuplicateTol;
            if (to.z != from.z) last_z_move_ = out_->size();
            out_->push_back(std::move(m));
            return;
        }

        if (!prog_.has_layer_markers) {
            Layer* l = layer();
            if (!l || from.z > l->z + 1e-9) start_layer_at_deposit();
        }
        Layer& l = prog_.layers.back();
        if (std::isnan(l.z)) {
            l.z = from.z;
            if (prog_.layers.size() == 1) prog_.mode = st_.e_relative ? ExtrusionMode::relative : ExtrusionMode::absolute;
        }
        if (!open_ || l.paths.empty()) {
            flush_pending();
            Toolpath p;
            p.kind = kind_;
            p.layer = l.index;
            PathVertex v0;
            v0.x = from.x, v0.y = from.y, v0.z = from.z;
            v0.f = st_.feed;
            p.vertices.push_back(v0);
            l.paths.push_back(std::move(p));
            out_->push_back(Segment{l.paths.size() - 1, 0, 0});
            open_ = true;
        }
        src.before = std::move(pending_);
        pending_.clear();
        PathVertex v;
        v.x = to.x, v.y = to.y, v.z = to.z;
        v.e = de;
        v.f = st_.feed;
        v.source = std::make_shared<const MoveSource>(std::move(src));
        Toolpath& p = l.paths.back();
        p.vertices.push_back(std::move(v));
        std::get<Segment>(out_->back()).last = p.vertices.size() - 1;
        (void)line_no;
    }

    // Markerless files: a layer begins with the last Z move before its first
    // deposition, so the move that reached the new height belongs to it.
    void start_layer_at_deposit() {
        flush_pending();
        std::vector<Item>* prev = out_;
        std::size_t cut = prev->size();
        if (last_z_move_ && *last_z_move_ < prev->size()) {
            cut = *last_z_move_;
            for (std::size_t k = cut; k < prev->size(); ++k)
                if (std::holds_alternative<Segment>((*prev)[k])) cut = prev->size();
        }
        std::vector<Item> moved(std::make_move_iterator(prev->begin() + static_cast<std::ptrdiff_t>(cut)),
                                std::make_move_iterator(prev->end()));
        prev->erase(prev->begin() + static_cast<std::ptrdiff_t>(cut), prev->end());
        begin_layer();
        prog_.layers.back().items = std::move(moved);
        open_ = false;
    }

    void finish() {
        flush_pending();
        double prev = 0.0;
        for (auto& l : prog_.layers) {
            if (std::isnan(l.z)) {
                l.z = prev;
                for (const auto& item : l.items)
                    if (auto* m = std::get_if<Motion>(&item)) l.z = m->target.z;
            }
            if (l.index > 0 && !(l.z > prev))
                prog_.warnings.push_back("layer " + std::to_string(l.index) + " z " + format_number(l.z) +
                                         " does not increase over the previous layer");
            l.thickness = l.index == 0 ? l.z : l.z - prev;
            prev = l.z;
            for (auto& p : l.paths) {
                const auto& a = p.vertices.front();
                const auto& b = p.vertices.back();
                p.closed = p.vertices.size() > 2 && norm(a.position() - b.position()) < kClosedTol;
            }
        }
        // Trailing items after the final deposition form the epilogue.
        for (auto it = prog_.layers.rbegin(); it != prog_.layers.rend(); ++it) {
            auto& items = it->items;
            auto last = std::find_if(items.rbegin(), items.rend(),
                                     [](const Item& i) { return std::holds_alternative<Segment>(i); });
            if (last == items.rend()) continue;
            if (it != prog_.layers.rbegin()) break;
            auto cut = last.base();
            prog_.epilogue.assign(std::make_move_iterator(cut), std::make_move_iterator(items.end()));
            items.erase(cut, items.end());
            break;
        }
    }

    std::string_view text_;
    PrintProgram prog_;
    MachineState st_;
    std::vector<Item>* out_ = nullptr;
    std::vector<RawLine> pending_;
    bool open_ = false;
    PathKind kind_ = PathKind::unknown;
    std::optional<std::size_t> last_z_move_;
};

void append_word(std::string& out, char letter, double value) {
    out += ' ';
    out += letter;
    out += format_number(value);
}

class Emitter {
public:
    using Visit = std::function<void(const Vec3&, const Vec3&, double, bool)>;

    Emitter(const PrintProgram& p, std::string* out, const Visit* visit) : prog_(p), out_(out), visit_(visit) {}

    void run() {
        const bool markers = prog_.modified && !prog_.has_layer_markers;
        items(prog_.prologue, nullptr);
        for (const auto& l : prog_.layers) {
            if (markers) line(";LAYER:" + std::to_string(l.index), prog_.eol);
            items(l.items, &l);
        }
        items(prog_.epilogue, nullptr);
    }

private:
    void items(const std::vector<Item>& list, const Layer* layer) {
        for (const auto& item : list) {
            if (auto* r = std::get_if<RawLine>(&item)) raw(*r);
            else if (auto* m = std::get_if<Motion>(&item)) motion(*m);
            else segment(std::get<Segment>(item), *layer);
        }
    }

    void line(const std::string& text, const std::string& eol) {
        if (!out_) return;
        *out_ += text;
        *out_ += eol;
    }

    void raw(const RawLine& r) {
        if (out_) {
            *out_ += r.text;
            *out_ += r.eol;
        }
        Command c;
        try {
            c = parse_command(r.text, 0);
        } catch (const ParseError&) {
            return;
        }
        st_.apply(c);
    }

    void visit(const Vec3& from, const Vec3& to, double f, bool extruding) {
        if (visit_) (*visit_)(from, to, f, extruding);
    }

    double e_word(double delta) {
        st_.e_abs += delta;
        return st_.e_relative ? delta : st_.e_abs;
    }

    void motion(const Motion& m) {
        Vec3 from = st_.pos;
        if (m.verbatim) {
            line(m.text, m.src.eol);
            if (m.has_e) st_.e_abs += m.e;
            if (m.src.order.find('F') != std::string::npos) st_.feed = m.f;
        } else if (unchanged(m.src, m.target, m.e, m.f)) {
            line(m.src.text, m.src.eol);
            st_.feed = m.f;
        } else {
            std::string text = "G" + std::to_string(m.src.g);
            bool f_written = false;
            for (char w : m.src.order) {
                if (w == 'X') append_word(text, 'X', m.target.x);
                if (w == 'Y') append_word(text, 'Y', m.target.y);
                if (w == 'Z') append_word(text, 'Z', m.target.z);
                if (w == 'E') append_word(text, 'E', e_word(m.e));
                if (w == 'F') append_word(text, 'F', m.f * 60.0), f_written = true;
            }
            if (!f_written && st_.feed != m.f) append_word(text, 'F', m.f * 60.0);
            text += m.src.extra;
            text += m.src.comment;
            line(text, m.src.eol);
            st_.feed = m.f;
        }
        st_.pos = m.target;
        visit(from, m.target, st_.feed, m.has_e && m.e > 0.0);
    }

    void travel_to(const Vec3& target) {
        const double tf = prog_.travel_feed;
        auto go = [&](const Vec3& to, bool xy) {
            std::string text = "G0";
            if (xy) {
                append_word(text, 'X', to.x);
                append_word(text, 'Y', to.y);
            } else {
                append_word(text, 'Z', to.z);
            }
            if (st_.feed != tf) append_word(text, 'F', tf * 60.0);
            st_.feed = tf;
            line(text, prog_.eol);
            visit(st_.pos, to, tf, false);
            st_.pos = to;
        };
        const bool xy = std::hypot(target.x - st_.pos.x, target.y - st_.pos.y) > kDuplicateTol;
        if (xy) {
            const double lift = std::max(st_.pos.z, target.z);
            if (lift > st_.pos.z + kDuplicateTol) go({st_.pos.x, st_.pos.y, lift}, false);
            go({target.x, target.y, st_.pos.z}, true);
        }
        if (std::abs(st_.pos.z - target.z) > kDuplicateTol) go({st_.pos.x, st_.pos.y, target.z}, false);
    }

    void segment(const Segment& s, const Layer& layer) {
        const Toolpath& p = layer.paths[s.path];
        if (!s.join) travel_to(p.vertices[s.first].top());
        for (std::size_t i = s.first + 1; i <= s.last; ++i) vertex(p.vertices[i]);
    }

    // True when writing `src` again would produce the same values, in which
    // case the original line is emitted as read. Consumes the E delta.
    bool unchanged(const MoveSource& src, const Vec3& to, double e, double f) {
        if (src.text.empty() || src.values.size() != src.order.size()) return false;
        const double e_before = st_.e_abs;
        bool same = true;
        auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
        for (std::size_t i = 0; i < src.order.size() && same; ++i) {
            const double v = src.values[i];
            switch (src.order[i]) {
            case 'X': same = near(to.x, v); break;
            case 'Y': same = near(to.y, v); break;
            case 'Z': same = near(to.z, v); break;
            case 'E': same = near(st_.e_relative ? e : st_.e_abs + e, v); break;
            case 'F': same = near(f * 60.0, v); break;
            }
        }
        if (src.order.find('X') == std::string::npos && !near(to.x, st_.pos.x)) same = false;
        if (src.order.find('Y') == std::string::npos && !near(to.y, st_.pos.y)) same = false;
        if (src.order.find('Z') == std::string::npos && !near(to.z, st_.pos.z)) same = false;
        if (src.order.find('E') == std::string::npos && e != 0.0) same = false;
        if (src.order.find('F') == std::string::npos && st_.feed != f) same = false;
        if (same) st_.e_abs = e_before + e;
        return same;
    }

    void vertex(const PathVertex& v) {
        static const MoveSource synthetic;
        const MoveSource& src = v.source ? *v.source : synthetic;
        for (const auto& r : src.before) raw(r);
        if (v.source && unchanged(src, v.top(), v.e, v.f)) {
            line(src.text, src.eol);
            st_.feed = v.f;
            visit(st_.pos, v.top(), v.f, true);
            st_.pos = v.top();
            return;
        }
        std::string order = v.source ? src.order : "XYZE";
        if (order.find('Z') == std::string::npos) {
            auto y = order.find('Y');
            auto x = order.find('X');
            auto at = y != std::string::npos ? y + 1 : x != std::string::npos ? x + 1 : 0;
            order.insert(order.begin() + static_cast<std::ptrdiff_t>(at), 'Z');
        }
        if (st_.feed != v.f && order.find('F') == std::string::npos) order += 'F';
        std::string text = "G" + std::to_string(src.g);
        const Vec3 top = v.top();
        for (char w : order) {
            if (w == 'X') append_word(text, 'X', top.x);
            if (w == 'Y') append_word(text, 'Y', top.y);
            if (w == 'Z') append_word(text, 'Z', top.z);
            if (w == 'E') append_word(text, 'E', e_word(v.e));
            if (w == 'F') append_word(text, 'F', v.f * 60.0);
        }
        text += src.extra;
        text += src.comment;
        line(text, v.source ? src.eol : prog_.eol);
        st_.feed = v.f;
        visit(st_.pos, top, v.f, true);
        st_.pos = top;
    }

    const PrintProgram& prog_;
    std::string* out_;
    const Visit* visit_;
    MachineState st_;
};

} // namespace

double Toolpath::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) total += norm(vertices[i].top() - vertices[i - 1].top());
    return total;
}

double Toolpath::extrusion() const {
    double total = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) total += vertices[i].e;
    return total;
}

std::size_t PrintProgram::vertex_count() const {
    std::size_t n = 0;
    for (const auto& l : layers)
        for (const auto& p : l.paths) n += p.vertices.size();
    return n;
}

PathKind kind_from_comment(std::string_view type) {
    std::string t;
    for (char c : type) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (t.find("PERIMETER") != std::string::npos || t.starts_with("WALL")) return PathKind::perimeter;
    if (t.find("FILL") != std::string::npos || t.find("SKIN") != std::string::npos) return PathKind::infill;
    return PathKind::unknown;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    std::string s(buf);
    if (s == "-0.00000") s = "0.00000";
    return s;
}

PrintProgram parse_gcode(std::string_view text) { return Parser(text).run(); }

std::string emit_gcode(const PrintProgram& program) {
    std::string out;
    out.reserve(program.vertex_count() * 40 + 1024);
    Emitter(program, &out, nullptr).run();
    return out;
}

void walk_moves(const PrintProgram& program,
                const std::function<void(const Vec3&, const Vec3&, double, bool)>& visit) {
    Emitter(program, nullptr, &visit).run();
}

std::vector<std::vector<Toolpath>> extract_paths(const PrintProgram& program) {
    std::vector<std::vector<Toolpath>> out;
    out.reserve(program.layers.size());
    for (const auto& l : program.layers) out.push_back(l.paths);
    return out;
}

double total_extrusion(const PrintProgram& program) {
    double total = 0.0;
    for (const auto& l : program.layers)
        for (const auto& p : l.paths) total += p.extrusion();
    return total;
}

} // namespace fffaa

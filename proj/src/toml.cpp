#include "qwalk/toml.hpp"

#include "qwalk/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

namespace qwalk {

namespace {

using json = nlohmann::ordered_json;

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_blank_lines();
            if (at_end())
                break;
            if (peek() == '[') {
                ++pos_;
                if (peek() == '[')
                    error("arrays of tables are not supported");
                skip_spaces();
                const auto path = key_path();
                skip_spaces();
                expect(']');
                table = &open_table(root, path);
            } else {
                const auto path = key_path();
                skip_spaces();
                expect('=');
                skip_spaces();
                assign(*table, path, value());
            }
            end_of_line();
        }
        return root;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::vector<std::string> defined_tables_;

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::config, "config line " + std::to_string(line_) + ": " + what);
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void expect(char c) {
        if (peek() != c)
            error(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_spaces() {
        while (peek() == ' ' || peek() == '\t')
            ++pos_;
    }

    void skip_comment() {
        if (peek() == '#')
            while (!at_end() && peek() != '\n')
                ++pos_;
    }

    void skip_blank_lines() {
        while (!at_end()) {
            skip_spaces();
            skip_comment();
            if (peek() == '\r')
                ++pos_;
            if (peek() != '\n')
                return;
            ++pos_;
            ++line_;
        }
    }

    /// Whitespace, comments and newlines inside arrays and inline tables.
    void skip_layout() {
        while (true) {
            skip_spaces();
            skip_comment();
            if (peek() == '\r')
                ++pos_;
            if (peek() != '\n')
                return;
            ++pos_;
            ++line_;
        }
    }

    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (peek() == '\r')
            ++pos_;
        if (at_end())
            return;
        if (peek() != '\n')
            error("unexpected trailing characters");
        ++pos_;
        ++line_;
    }

    std::string key() {
        if (peek() == '"')
            return basic_string();
        if (peek() == '\'')
            return literal_string();
        const std::size_t start = pos_;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')
            ++pos_;
        if (pos_ == start)
            error("expected a key");
        return std::string(text_.substr(start, pos_ - start));
    }

    std::vector<std::string> key_path() {
        std::vector<std::string> path{key()};
        skip_spaces();
        while (peek() == '.') {
            ++pos_;
            skip_spaces();
            path.push_back(key());
            skip_spaces();
        }
        return path;
    }

    json& open_table(json& root, const std::vector<std::string>& path) {
        std::string joined;
        for (const auto& p : path)
            joined += (joined.empty() ? "" : ".") + p;
        for (const auto& d : defined_tables_)
            if (d == joined)
                error("table [" + joined + "] defined twice");
        defined_tables_.push_back(joined);
        json* t = &root;
        for (const auto& p : path) {
            if (!t->contains(p))
                (*t)[p] = json::object();
            t = &(*t)[p];
            if (!t->is_object())
                error("key '" + p + "' is not a table");
        }
        return *t;
    }

    void assign(json& table, const std::vector<std::string>& path, json v) {
        json* t = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            if (!t->contains(path[i]))
                (*t)[path[i]] = json::object();
            t = &(*t)[path[i]];
            if (!t->is_object())
                error("key '" + path[i] + "' is not a table");
        }
        if (t->contains(path.back()))
            error("duplicate key '" + path.back() + "'");
        (*t)[path.back()] = std::move(v);
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n')
                error("unterminated string");
            const char c = text_[pos_++];
            if (c == '"')
                return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            const char e = text_[pos_++];
            switch (e) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case 'u': append_utf8(out, hex_code(4)); break;
            case 'U': append_utf8(out, hex_code(8)); break;
            default: error(std::string("unsupported escape \\") + e);
            }
        }
    }

    std::uint32_t hex_code(std::size_t digits) {
        if (pos_ + digits > text_.size())
            error("truncated unicode escape");
        std::uint32_t code = 0;
        const auto first = text_.data() + pos_;
        const auto [end, ec] = std::from_chars(first, first + digits, code, 16);
        if (ec != std::errc{} || end != first + digits)
            error("bad unicode escape");
        pos_ += digits;
        if (code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF))
            error("unicode escape is not a scalar value");
        return code;
    }

    static void append_utf8(std::string& out, std::uint32_t c) {
        if (c < 0x80) {
            out += char(c);
        } else if (c < 0x800) {
            out += char(0xC0 | (c >> 6));
            out += char(0x80 | (c & 0x3F));
        } else if (c < 0x10000) {
            out += char(0xE0 | (c >> 12));
            out += char(0x80 | ((c >> 6) & 0x3F));
            out += char(0x80 | (c & 0x3F));
        } else {
            out += char(0xF0 | (c >> 18));
            out += char(0x80 | ((c >> 12) & 0x3F));
            out += char(0x80 | ((c >> 6) & 0x3F));
            out += char(0x80 | (c & 0x3F));
        }
    }

    std::string literal_string() {
        expect('\'');
        const std::size_t start = pos_;
        while (!at_end() && peek() != '\'' && peek() != '\n')
            ++pos_;
        if (peek() != '\'')
            error("unterminated string");
        std::string out(text_.substr(start, pos_ - start));
        ++pos_;
        return out;
    }

    json number() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                             peek() == '.' || peek() == '_'))
            ++pos_;
        std::string token;
        for (char c : text_.substr(start, pos_ - start))
            if (c != '_')
                token += c;
        if (token.empty())
            error("expected a value");
        if (token == "true")
            return true;
        if (token == "false")
            return false;
        const bool is_float = token.find_first_of(".eE") != std::string::npos || token.find("inf") != std::string::npos ||
                              token.find("nan") != std::string::npos;
        if (!is_float) {
            std::int64_t v = 0;
            const char* b = token.data() + (token[0] == '+' ? 1 : 0);
            const auto [p, ec] = std::from_chars(b, token.data() + token.size(), v);
            if (ec == std::errc() && p == token.data() + token.size())
                return v;
            error("malformed integer '" + token + "'");
        }
        if (token.find("inf") != std::string::npos || token.find("nan") != std::string::npos)
            error("non-finite numbers are not allowed");
        double v = 0;
        const char* b = token.data() + (token[0] == '+' ? 1 : 0);
        const auto [p, ec] = std::from_chars(b, token.data() + token.size(), v);
        if (ec != std::errc() || p != token.data() + token.size())
            error("malformed number '" + token + "'");
        return v;
    }

    json value() {
        const char c = peek();
        if (c == '"')
            return basic_string();
        if (c == '\'')
            return literal_string();
        if (c == '[') {
            ++pos_;
            json arr = json::array();
            skip_layout();
            while (peek() != ']') {
                arr.push_back(value());
                skip_layout();
                if (peek() == ',') {
                    ++pos_;
                    skip_layout();
                } else if (peek() != ']') {
                    error("expected ',' or ']' in array");
                }
            }
            ++pos_;
            return arr;
        }
        if (c == '{') {
            ++pos_;
            json obj = json::object();
            skip_spaces();
            while (peek() != '}') {
                const auto path = key_path();
                skip_spaces();
                expect('=');
                skip_spaces();
                assign(obj, path, value());
                skip_spaces();
                if (peek() == ',') {
                    ++pos_;
                    skip_spaces();
                } else if (peek() != '}') {
                    error("expected ',' or '}' in inline table");
                }
            }
            ++pos_;
            return obj;
        }
        return number();
    }
};

} // namespace

nlohmann::ordered_json parse_toml(std::string_view text) { return Parser(text).parse(); }

} // namespace qwalk

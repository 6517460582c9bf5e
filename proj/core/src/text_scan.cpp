#include "bigmas/text_scan.hpp"

#include <algorithm>
#include <cctype>

namespace bigmas {

std::string trim_copy(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_lower_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> fenced_blocks(const std::string& text) {
    std::vector<std::string> blocks;
    size_t pos = 0;
    while (true) {
        size_t open = text.find("```", pos);
        if (open == std::string::npos) break;
        size_t content = text.find('\n', open + 3);
        if (content == std::string::npos) break; // fence with no body
        ++content;
        size_t close = text.find("```", content);
        if (close == std::string::npos) break; // unterminated
        blocks.push_back(text.substr(content, close - content));
        pos = close + 3;
    }
    return blocks;
}

std::vector<std::string> balanced_objects(const std::string& text) {
    std::vector<std::string> spans;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        int depth = 0;
        bool in_string = false;
        for (size_t j = i; j < text.size(); ++j) {
            char c = text[j];
            if (in_string) {
                if (c == '\\') { ++j; continue; }
                if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') { in_string = true; continue; }
            if (c == '{') ++depth;
            else if (c == '}') {
                --depth;
                if (depth == 0) {
                    spans.push_back(text.substr(i, j - i + 1));
                    break;
                }
            }
        }
    }
    return spans;
}

std::optional<Json> last_object_with_key(const std::string& text, const std::string& key) {
    std::optional<Json> found;
    for (const auto& span : balanced_objects(text)) {
        Json j = Json::parse(span, nullptr, false);
        if (j.is_object() && j.contains(key)) found = std::move(j);
    }
    return found;
}

std::optional<Json> parse_whole_object(const std::string& text) {
    Json j = Json::parse(trim_copy(text), nullptr, false);
    if (j.is_object()) return j;
    return std::nullopt;
}

namespace {
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}
} // namespace

bool contains_whole_token(const std::string& text, const std::string& token) {
    return last_whole_token_pos(text, token).has_value();
}

std::optional<size_t> last_whole_token_pos(const std::string& text, const std::string& token) {
    if (token.empty()) return std::nullopt;
    std::optional<size_t> found;
    size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !ident_char(text[pos - 1]);
        size_t end = pos + token.size();
        bool right_ok = end == text.size() || !ident_char(text[end]);
        if (left_ok && right_ok) found = pos;
        pos = end;
    }
    return found;
}

} // namespace bigmas

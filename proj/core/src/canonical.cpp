#include "veldt/canonical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace veldt::canonical {
namespace {

void append_escaped(std::string& out, std::string_view s) {
    out.push_back('"');
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        if (c == '"') {
            out += "\\\"";
            ++i;
        } else if (c == '\\') {
            out += "\\\\";
            ++i;
        } else if (c == '\b') {
            out += "\\b";
            ++i;
        } else if (c == '\t') {
            out += "\\t";
            ++i;
        } else if (c == '\n') {
            out += "\\n";
            ++i;
        } else if (c == '\f') {
            out += "\\f";
            ++i;
        } else if (c == '\r') {
            out += "\\r";
            ++i;
        } else if (c >= 0x20 && c <= 0x7e) {
            out.push_back(static_cast<char>(c));
            ++i;
        } else {
            // Decode one UTF-8 sequence and emit \uXXXX (surrogate pair above
            // the BMP). Invalid sequences are rejected outright.
            std::uint32_t cp = 0;
            std::size_t len = 0;
            if (c < 0x80) {
                cp = c;
                len = 1;
            } else if ((c & 0xe0) == 0xc0) {
                cp = c & 0x1f;
                len = 2;
            } else if ((c & 0xf0) == 0xe0) {
                cp = c & 0x0f;
                len = 3;
            } else if ((c & 0xf8) == 0xf0) {
                cp = c & 0x07;
                len = 4;
            } else {
                throw CanonicalizationError("invalid UTF-8 in string");
            }
            if (i + len > s.size()) throw CanonicalizationError("truncated UTF-8 in string");
            for (std::size_t k = 1; k < len; ++k) {
                const unsigned char cc = static_cast<unsigned char>(s[i + k]);
                if ((cc & 0xc0) != 0x80) throw CanonicalizationError("invalid UTF-8 continuation");
                cp = cp << 6 | (cc & 0x3f);
            }
            char buf[16];
            if (cp >= 0x10000) {
                cp -= 0x10000;
                const std::uint32_t hi = 0xd800 + (cp >> 10);
                const std::uint32_t lo = 0xdc00 + (cp & 0x3ff);
                std::snprintf(buf, sizeof buf, "\\u%04x\\u%04x", hi, lo);
            } else {
                std::snprintf(buf, sizeof buf, "\\u%04x", cp);
            }
            out += buf;
            i += len;
        }
    }
    out.push_back('"');
}

void append_int(std::string& out, std::int64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void append_double(std::string& out, double v) {
    if (!std::isfinite(v)) throw CanonicalizationError("non-finite number");
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void append_wrapper_open(std::string& out, std::string_view type_name) {
    out += "{\"__t__\":\"";
    out += type_name;
    out += "\",\"v\":";
}

void encode(std::string& out, const Value& v);

void encode_list(std::string& out, const ValueList& list) {
    out.push_back('[');
    bool first = true;
    for (const auto& item : list) {
        if (!first) out.push_back(',');
        first = false;
        encode(out, item);
    }
    out.push_back(']');
}

void encode(std::string& out, const Value& v) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::nullptr_t>) {
                out += "null";
            } else if constexpr (std::is_same_v<T, bool>) {
                out += x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                append_int(out, x);
            } else if constexpr (std::is_same_v<T, double>) {
                append_double(out, x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                append_escaped(out, x);
            } else if constexpr (std::is_same_v<T, Timestamp>) {
                append_wrapper_open(out, "datetime");
                append_escaped(out, format_iso8601(x));
                out.push_back('}');
            } else if constexpr (std::is_same_v<T, BytesValue>) {
                append_wrapper_open(out, "bytes");
                append_escaped(out, crypto::base64_encode(x.data));
                out.push_back('}');
            } else if constexpr (std::is_same_v<T, Decimal>) {
                append_wrapper_open(out, "decimal");
                append_escaped(out, x.digits);
                out.push_back('}');
            } else if constexpr (std::is_same_v<T, SetValue>) {
                std::vector<std::string> encoded;
                encoded.reserve(x.members.size());
                for (const auto& m : x.members) encoded.push_back(canonical_bytes(m));
                std::sort(encoded.begin(), encoded.end());
                encoded.erase(std::unique(encoded.begin(), encoded.end()), encoded.end());
                append_wrapper_open(out, "set");
                out.push_back('[');
                bool first = true;
                for (const auto& e : encoded) {
                    if (!first) out.push_back(',');
                    first = false;
                    out += e;
                }
                out.push_back(']');
                out.push_back('}');
            } else if constexpr (std::is_same_v<T, ValueList>) {
                encode_list(out, x);
            } else if constexpr (std::is_same_v<T, ValueMap>) {
                out.push_back('{');
                bool first = true;
                for (const auto& [key, val] : x) {
                    if (!first) out.push_back(',');
                    first = false;
                    append_escaped(out, key);
                    out.push_back(':');
                    encode(out, val);
                }
                out.push_back('}');
            }
        },
        v.raw());
}

std::string normalize_decimal(std::string_view s) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
        negative = s[pos] == '-';
        ++pos;
    }
    std::string intpart, fracpart;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') intpart.push_back(s[pos++]);
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') fracpart.push_back(s[pos++]);
        if (fracpart.empty()) throw CanonicalizationError("decimal with bare point: " + std::string(s));
    }
    if (pos != s.size() || intpart.empty())
        throw CanonicalizationError("malformed decimal: " + std::string(s));
    const auto nz = intpart.find_first_not_of('0');
    intpart = nz == std::string::npos ? "0" : intpart.substr(nz);
    while (!fracpart.empty() && fracpart.back() == '0') fracpart.pop_back();
    std::string out;
    if (negative && !(intpart == "0" && fracpart.empty())) out.push_back('-');
    out += intpart;
    if (!fracpart.empty()) {
        out.push_back('.');
        out += fracpart;
    }
    return out;
}

Value value_from_json(const nlohmann::json& j) {
    using nlohmann::json;
    switch (j.type()) {
        case json::value_t::null:
            return Value(nullptr);
        case json::value_t::boolean:
            return Value(j.get<bool>());
        case json::value_t::number_integer:
            return Value(j.get<std::int64_t>());
        case json::value_t::number_unsigned: {
            const auto u = j.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
                throw CanonicalizationError("integer out of range");
            return Value(static_cast<std::int64_t>(u));
        }
        case json::value_t::number_float:
            return Value(j.get<double>());
        case json::value_t::string:
            return Value(j.get<std::string>());
        case json::value_t::array: {
            ValueList list;
            list.reserve(j.size());
            for (const auto& item : j) list.push_back(value_from_json(item));
            return Value(std::move(list));
        }
        case json::value_t::object: {
            if (j.size() == 2 && j.contains("__t__") && j.contains("v") && j["__t__"].is_string()) {
                const std::string type_name = j["__t__"].get<std::string>();
                const auto& v = j["v"];
                if (type_name == "datetime" && v.is_string()) {
                    const auto t = parse_iso8601(v.get<std::string>());
                    if (!t) throw CanonicalizationError("bad datetime wrapper: " + v.get<std::string>());
                    return Value(*t);
                }
                if (type_name == "bytes" && v.is_string()) {
                    auto data = crypto::base64_decode(v.get<std::string>());
                    if (!data) throw CanonicalizationError("bad bytes wrapper");
                    return Value(BytesValue{std::move(*data)});
                }
                if (type_name == "decimal" && v.is_string())
                    return Value(Decimal{v.get<std::string>()});
                if (type_name == "set" && v.is_array()) {
                    SetValue set;
                    set.members.reserve(v.size());
                    for (const auto& item : v) set.members.push_back(value_from_json(item));
                    return Value(std::move(set));
                }
                throw CanonicalizationError("unknown wrapper type: " + type_name);
            }
            ValueMap map;
            for (const auto& [key, val] : j.items()) map.emplace(key, value_from_json(val));
            return Value(std::move(map));
        }
        default:
            throw CanonicalizationError("unsupported JSON value");
    }
}

}  // namespace

Value::Value(double d) : v_(d) {
    if (!std::isfinite(d)) throw CanonicalizationError("non-finite number");
}

Value::Value(Decimal d) : v_(Decimal{normalize_decimal(d.digits)}) {}

SetValue string_set(const std::vector<std::string>& items) {
    SetValue set;
    set.members.reserve(items.size());
    for (const auto& s : items) set.members.emplace_back(s);
    return set;
}

std::string canonical_bytes(const Value& value) {
    std::string out;
    encode(out, value);
    return out;
}

std::string canonical_bytes(const nlohmann::json& doc) {
    return canonical_bytes(value_from_json(doc));
}

nlohmann::json to_json(const Value& value) {
    using nlohmann::json;
    return std::visit(
        [&](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::nullptr_t>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                                 std::is_same_v<T, double> || std::is_same_v<T, std::string>) {
                return x;
            } else if constexpr (std::is_same_v<T, Timestamp>) {
                return json{{"__t__", "datetime"}, {"v", format_iso8601(x)}};
            } else if constexpr (std::is_same_v<T, BytesValue>) {
                return json{{"__t__", "bytes"}, {"v", crypto::base64_encode(x.data)}};
            } else if constexpr (std::is_same_v<T, Decimal>) {
                return json{{"__t__", "decimal"}, {"v", x.digits}};
            } else if constexpr (std::is_same_v<T, SetValue>) {
                json arr = json::array();
                std::vector<std::pair<std::string, const Value*>> ordered;
                ordered.reserve(x.members.size());
                for (const auto& m : x.members) ordered.emplace_back(canonical_bytes(m), &m);
                std::sort(ordered.begin(), ordered.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                std::string prev;
                bool have_prev = false;
                for (const auto& [enc, val] : ordered) {
                    if (have_prev && enc == prev) continue;
                    prev = enc;
                    have_prev = true;
                    arr.push_back(to_json(*val));
                }
                return json{{"__t__", "set"}, {"v", std::move(arr)}};
            } else if constexpr (std::is_same_v<T, ValueList>) {
                json arr = json::array();
                for (const auto& item : x) arr.push_back(to_json(item));
                return arr;
            } else {
                json obj = json::object();
                for (const auto& [key, val] : x) obj[key] = to_json(val);
                return obj;
            }
        },
        value.raw());
}

Value from_json(const nlohmann::json& doc) { return value_from_json(doc); }

crypto::Hash256 hash_of(const Value& value) { return crypto::sha256(canonical_bytes(value)); }

}  // namespace veldt::canonical

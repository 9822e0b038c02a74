#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/crypto.hpp"
#include "veldt/timeutil.hpp"

namespace veldt::canonical {

struct CanonicalizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-JSON-native values carried by canonical values. Each serializes as a
// type-marked wrapper object {"__t__": "<name>", "v": <encoding>} so the
// encoding is injective across types: timestamp(t) and the string holding
// t's ISO form produce different bytes.
struct Decimal {
    // Normalized decimal string: optional leading '-', no leading zeros, no
    // trailing fractional zeros, no bare trailing '.'.
    std::string digits;
    friend bool operator==(const Decimal&, const Decimal&) = default;
};

struct BytesValue {
    crypto::Bytes data;
    friend bool operator==(const BytesValue&, const BytesValue&) = default;
};

class Value;
using ValueList = std::vector<Value>;
using ValueMap = std::map<std::string, Value>;

// A set of values; canonicalization sorts members by their encoded form and
// drops duplicates, so insertion order never reaches the hash.
struct SetValue {
    ValueList members;
    friend bool operator==(const SetValue&, const SetValue&) = default;
};

class Value {
public:
    using Storage = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string,
                                 Timestamp, BytesValue, Decimal, SetValue, ValueList, ValueMap>;

    Value() : v_(nullptr) {}
    Value(std::nullptr_t) : v_(nullptr) {}
    Value(bool b) : v_(b) {}
    Value(int i) : v_(static_cast<std::int64_t>(i)) {}
    Value(std::int64_t i) : v_(i) {}
    Value(double d);  // rejects NaN and infinities
    Value(const char* s) : v_(std::string(s)) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(Timestamp t) : v_(t) {}
    Value(BytesValue b) : v_(std::move(b)) {}
    Value(Decimal d);  // validates and normalizes
    Value(SetValue s) : v_(std::move(s)) {}
    Value(ValueList l) : v_(std::move(l)) {}
    Value(ValueMap m) : v_(std::move(m)) {}

    const Storage& raw() const { return v_; }
    bool is_null() const { return std::holds_alternative<std::nullptr_t>(v_); }

    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&v_);
    }

    friend bool operator==(const Value&, const Value&) = default;

private:
    Storage v_;
};

// Helper for string sets, the common case in definitions.
SetValue string_set(const std::vector<std::string>& items);

// Deterministic encoding: object keys sorted bytewise, no whitespace, strings
// ASCII-escaped (\uXXXX outside 0x20..0x7e), integers without a fractional
// part, doubles in shortest round-trip form, wrappers for timestamp / bytes /
// decimal / set. The result is itself valid JSON.
std::string canonical_bytes(const Value& value);

// Canonical bytes of a plain JSON document (inbound envelopes and other wire
// docs). Numbers keep their parsed integer/double identity.
std::string canonical_bytes(const nlohmann::json& doc);

// Wrapper-preserving JSON conversions used by storage. from_json recognizes
// {"__t__": ..., "v": ...} wrappers and rebuilds the typed value; to_json
// emits them, so round-trips are exact:
//   canonical_bytes(from_json(to_json(v))) == canonical_bytes(v)
nlohmann::json to_json(const Value& value);
Value from_json(const nlohmann::json& doc);

crypto::Hash256 hash_of(const Value& value);

}  // namespace veldt::canonical

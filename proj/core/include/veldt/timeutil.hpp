#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace veldt {

// Microseconds since the Unix epoch, always UTC. Wrapped so timestamps stay a
// distinct type in canonical values and never mix with plain integers.
struct Timestamp {
    std::int64_t micros = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

    static Timestamp from_micros(std::int64_t us) { return Timestamp{us}; }
    static Timestamp from_seconds(std::int64_t s) { return Timestamp{s * 1'000'000}; }
};

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;
inline constexpr std::int64_t kMicrosPerMinute = 60 * kMicrosPerSecond;
inline constexpr std::int64_t kMicrosPerHour = 60 * kMicrosPerMinute;
inline constexpr std::int64_t kMicrosPerDay = 24 * kMicrosPerHour;

// ISO-8601 with explicit +00:00 offset, fractional seconds only when nonzero:
// 2026-01-01T00:00:00+00:00, 2026-01-01T00:00:00.250000+00:00.
std::string format_iso8601(Timestamp t);

// Accepts Z or +-HH:MM offsets and an optional fractional-second part of up to
// six digits. Returns nullopt on malformed input.
std::optional<Timestamp> parse_iso8601(std::string_view s);

Timestamp now_utc();

}  // namespace veldt

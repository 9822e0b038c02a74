#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace veldt::storage {

struct UnknownStore : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LockTimeout : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The fixed catalog of logical stores.
inline constexpr std::array<std::string_view, 10> kStoreCatalog = {
    "versions",        "invocations",      "principal_trust",        "evidence",
    "weight_overrides", "weight_changes",  "weight_suggestions",     "pending_recommendations",
    "breach_notifications", "cut_ledger",
};

// Composite keys join their parts with 0x1f so parts can never collide with
// each other; keys sort lexicographically, which keeps prefix scans cheap.
std::string make_key(std::initializer_list<std::string_view> parts);

// Thread-safe multi-store keyed document storage. Two backends share the
// interface: pure in-memory, and a durable directory of NDJSON files (one per
// store, atomically rewritten on flush, identical to the export format).
// Single-process contract: no cross-process coordination is attempted.
class Storage {
public:
    using MergeFn = std::function<nlohmann::json(std::optional<nlohmann::json>)>;
    using Row = std::pair<std::string, nlohmann::json>;

    static Storage in_memory();
    static Storage open(const std::filesystem::path& data_dir);

    Storage(Storage&&) noexcept;
    Storage& operator=(Storage&&) noexcept;
    ~Storage();

    std::optional<nlohmann::json> get(std::string_view store, std::string_view key) const;
    void put(std::string_view store, std::string_view key, nlohmann::json value);
    bool erase(std::string_view store, std::string_view key);

    // Atomic read-merge-write: the merge function runs under the store lock,
    // so concurrent upserts on one key serialize with no lost updates.
    nlohmann::json upsert(std::string_view store, std::string_view key, const MergeFn& merge);

    std::vector<Row> scan_prefix(std::string_view store, std::string_view key_prefix) const;
    std::vector<Row> dump(std::string_view store) const;
    // Rows whose record carries "tenant_id" == tenant. Namespace isolation is
    // enforced by keying every tenant-scoped record under its tenant prefix;
    // this filter is belt-and-suspenders for audit export.
    std::vector<Row> dump_tenant(std::string_view store, std::string_view tenant) const;
    std::size_t size(std::string_view store) const;

    // Exclusive per-chain lock keyed on (tenant, invocation). Locking is by
    // identifier, so it works before the chain has any rows. Distinct chains
    // proceed in parallel.
    template <class Fn>
    auto with_chain_lock(std::string_view tenant, std::string_view invocation, Fn&& fn)
        -> decltype(fn()) {
        auto guard = acquire_chain_lock(tenant, invocation);
        return fn();
    }

    void export_ndjson(std::string_view store, std::ostream& out) const;
    void import_ndjson(std::string_view store, std::istream& in);

    // No-op for the in-memory backend.
    void flush();

    bool durable() const { return impl_ != nullptr && is_durable_; }

private:
    class ChainLockGuard {
    public:
        explicit ChainLockGuard(std::timed_mutex& m);
        ~ChainLockGuard();
        ChainLockGuard(ChainLockGuard&&) = delete;

    private:
        std::timed_mutex& m_;
    };

    struct Impl;
    Storage(std::unique_ptr<Impl> impl, bool durable);
    ChainLockGuard acquire_chain_lock(std::string_view tenant, std::string_view invocation);

    std::unique_ptr<Impl> impl_;
    bool is_durable_ = false;
};

inline constexpr std::chrono::seconds kChainLockTimeout{10};

}  // namespace veldt::storage

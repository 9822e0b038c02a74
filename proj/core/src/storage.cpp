#include "veldt/storage.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <unordered_map>

namespace veldt::storage {
namespace {

constexpr char kKeySep = '\x1f';

}  // namespace

std::string make_key(std::initializer_list<std::string_view> parts) {
    std::string out;
    bool first = true;
    for (const auto p : parts) {
        if (!first) out.push_back(kKeySep);
        first = false;
        out += p;
    }
    return out;
}

struct Storage::Impl {
    struct Shard {
        mutable std::mutex mutex;
        std::map<std::string, nlohmann::json> rows;
        bool dirty = false;
    };

    std::unordered_map<std::string, Shard> shards;
    std::filesystem::path data_dir;

    std::mutex chain_registry_mutex;
    std::unordered_map<std::string, std::unique_ptr<std::timed_mutex>> chain_locks;

    Impl() {
        for (const auto s : kStoreCatalog) shards[std::string(s)];
    }

    Shard& shard(std::string_view store) {
        const auto it = shards.find(std::string(store));
        if (it == shards.end()) throw UnknownStore("unknown store: " + std::string(store));
        return it->second;
    }
    const Shard& shard(std::string_view store) const {
        const auto it = shards.find(std::string(store));
        if (it == shards.end()) throw UnknownStore("unknown store: " + std::string(store));
        return it->second;
    }

    std::filesystem::path file_for(std::string_view store) const {
        return data_dir / (std::string(store) + ".ndjson");
    }

    void load_all() {
        for (const auto s : kStoreCatalog) {
            const auto path = file_for(s);
            if (!std::filesystem::exists(path)) continue;
            std::ifstream in(path);
            load_stream(shard(s), in);
        }
    }

    static void load_stream(Shard& sh, std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto doc = nlohmann::json::parse(line);
            sh.rows[doc.at("k").get<std::string>()] = doc.at("v");
        }
    }

    static void write_stream(const Shard& sh, std::ostream& out) {
        for (const auto& [key, value] : sh.rows) {
            nlohmann::json doc{{"k", key}, {"v", value}};
            out << doc.dump() << '\n';
        }
    }

    void flush_durable() {
        for (const auto s : kStoreCatalog) {
            auto& sh = shard(s);
            std::lock_guard lock(sh.mutex);
            if (!sh.dirty) continue;
            const auto path = file_for(s);
            const auto tmp = path.string() + ".tmp";
            {
                std::ofstream out(tmp, std::ios::trunc);
                write_stream(sh, out);
            }
            std::filesystem::rename(tmp, path);
            sh.dirty = false;
        }
    }
};

Storage::Storage(std::unique_ptr<Impl> impl, bool durable) : impl_(std::move(impl)), is_durable_(durable) {}

Storage::Storage(Storage&&) noexcept = default;
Storage& Storage::operator=(Storage&&) noexcept = default;

Storage::~Storage() {
    if (impl_ && is_durable_) {
        try {
            impl_->flush_durable();
        } catch (...) {
            // Destructors must not throw; an explicit flush() surfaces errors.
        }
    }
}

Storage Storage::in_memory() { return Storage(std::make_unique<Impl>(), false); }

Storage Storage::open(const std::filesystem::path& data_dir) {
    std::filesystem::create_directories(data_dir);
    auto impl = std::make_unique<Impl>();
    impl->data_dir = data_dir;
    impl->load_all();
    return Storage(std::move(impl), true);
}

std::optional<nlohmann::json> Storage::get(std::string_view store, std::string_view key) const {
    const auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    const auto it = sh.rows.find(std::string(key));
    if (it == sh.rows.end()) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, it->second);
}

void Storage::put(std::string_view store, std::string_view key, nlohmann::json value) {
    auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    sh.rows[std::string(key)] = std::move(value);
    sh.dirty = true;
}

bool Storage::erase(std::string_view store, std::string_view key) {
    auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    const bool erased = sh.rows.erase(std::string(key)) > 0;
    if (erased) sh.dirty = true;
    return erased;
}

nlohmann::json Storage::upsert(std::string_view store, std::string_view key, const MergeFn& merge) {
    auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    const std::string k(key);
    const auto it = sh.rows.find(k);
    std::optional<nlohmann::json> existing;
    if (it != sh.rows.end()) existing = it->second;
    auto merged = merge(std::move(existing));
    sh.rows[k] = merged;
    sh.dirty = true;
    return merged;
}

std::vector<Storage::Row> Storage::scan_prefix(std::string_view store, std::string_view key_prefix) const {
    const auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    std::vector<Row> out;
    for (auto it = sh.rows.lower_bound(std::string(key_prefix)); it != sh.rows.end(); ++it) {
        if (it->first.compare(0, key_prefix.size(), key_prefix) != 0) break;
        out.emplace_back(it->first, it->second);
    }
    return out;
}

std::vector<Storage::Row> Storage::dump(std::string_view store) const {
    const auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    return {sh.rows.begin(), sh.rows.end()};
}

std::vector<Storage::Row> Storage::dump_tenant(std::string_view store, std::string_view tenant) const {
    const auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    std::vector<Row> out;
    for (const auto& [key, value] : sh.rows) {
        if (value.is_object() && value.contains("tenant_id") && value["tenant_id"].is_string() &&
            value["tenant_id"].get_ref<const std::string&>() == tenant)
            out.emplace_back(key, value);
    }
    return out;
}

std::size_t Storage::size(std::string_view store) const {
    const auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    return sh.rows.size();
}

void Storage::export_ndjson(std::string_view store, std::ostream& out) const {
    const auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    Impl::write_stream(sh, out);
}

void Storage::import_ndjson(std::string_view store, std::istream& in) {
    auto& sh = impl_->shard(store);
    std::lock_guard lock(sh.mutex);
    Impl::load_stream(sh, in);
    sh.dirty = true;
}

void Storage::flush() {
    if (is_durable_) impl_->flush_durable();
}

Storage::ChainLockGuard::ChainLockGuard(std::timed_mutex& m) : m_(m) {
    if (!m_.try_lock_for(kChainLockTimeout))
        throw LockTimeout("chain lock not acquired within timeout");
}

Storage::ChainLockGuard::~ChainLockGuard() { m_.unlock(); }

Storage::ChainLockGuard Storage::acquire_chain_lock(std::string_view tenant, std::string_view invocation) {
    const auto key = make_key({tenant, invocation});
    std::timed_mutex* m = nullptr;
    {
        std::lock_guard lock(impl_->chain_registry_mutex);
        auto& slot = impl_->chain_locks[key];
        if (!slot) slot = std::make_unique<std::timed_mutex>();
        m = slot.get();
    }
    return ChainLockGuard(*m);
}

}  // namespace veldt::storage

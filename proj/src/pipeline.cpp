#include "relaxdice/pipeline.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "relaxdice/binary_io.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/rng.hpp"
#include "relaxdice/text.hpp"

namespace relaxdice {

namespace {

constexpr std::uint16_t kDatasetVersion = 1;
constexpr std::uint16_t kMdpVersion = 1;

// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(k);
    return idx;
}

void append_record(TransitionDataset& out, const TransitionDataset& src, std::size_t i) {
    if (src.is_tabular())
        out.transitions.push_back(src.transitions[i]);
    else
        out.push_back(src.state(i), src.action(i), src.next_state(i));
}

void append_initial_states(TransitionDataset& out, const TransitionDataset& src) {
    out.initial_states.insert(out.initial_states.end(), src.initial_states.begin(), src.initial_states.end());
    out.initial_state_values.insert(out.initial_state_values.end(), src.initial_state_values.begin(),
                                    src.initial_state_values.end());
}

void put_header(ByteWriter& w, const char* magic, std::uint16_t version) {
    w.put_bytes(std::string_view(magic, 4));
    w.put<std::uint16_t>(version);
}

void finish(ByteWriter& w) {
    const auto crc = crc32_of(w.bytes().data(), w.bytes().size());
    w.put<std::uint32_t>(crc);
}

// Checks magic, version and the CRC trailer; returns a reader over the payload.
ByteReader open_container(const std::vector<unsigned char>& bytes, const char* magic, std::uint16_t version) {
    if (bytes.size() < 4 + 2 + 4) throw FormatError("truncated input");
    if (std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != std::string_view(magic, 4))
        throw FormatError(std::string("bad magic, expected ") + std::string(magic, 4));
    ByteReader header(bytes.data() + 4, 2);
    const auto found = header.get<std::uint16_t>();
    if (found != version)
        throw FormatError("unsupported format version " + std::to_string(found));
    const std::size_t body = bytes.size() - 4;
    ByteReader trailer(bytes.data() + body, 4);
    if (trailer.get<std::uint32_t>() != crc32_of(bytes.data(), body)) throw FormatError("checksum mismatch");
    ByteReader r(bytes.data(), body);
    r.get_bytes(6);
    return r;
}

// Guards allocations driven by a length field.
void require_items(const ByteReader& r, std::uint64_t count, std::size_t item_size) {
    if (item_size != 0 && count > r.remaining() / item_size) throw FormatError("truncated input");
}

}  // namespace

void MixSpec::validate() const {
    if (n_expert == 0 && n_random == 0) throw InvalidArgument("mix spec requests no records");
}

double level_ratio(MixLevel level) {
    switch (level) {
        case MixLevel::L1: return 0.2;
        case MixLevel::L2: return 0.15;
        case MixLevel::L3: return 0.1;
        case MixLevel::L4: return 0.05;
        case MixLevel::custom: break;
    }
    throw InvalidArgument("custom mix level has no preset ratio");
}

std::string to_string(MixLevel level) {
    switch (level) {
        case MixLevel::L1: return "L1";
        case MixLevel::L2: return "L2";
        case MixLevel::L3: return "L3";
        case MixLevel::L4: return "L4";
        case MixLevel::custom: return "custom";
    }
    return "custom";
}

MixLevel mix_level_from_string(const std::string& name) {
    if (name == "L1") return MixLevel::L1;
    if (name == "L2") return MixLevel::L2;
    if (name == "L3") return MixLevel::L3;
    if (name == "L4") return MixLevel::L4;
    if (name == "custom") return MixLevel::custom;
    throw InvalidArgument("unknown mix level '" + name + "'");
}

MixSpec mix_spec_for_level(MixLevel level, std::size_t n_random) {
    const auto n_expert = static_cast<std::size_t>(std::llround(level_ratio(level) * static_cast<double>(n_random)));
    MixSpec spec{n_expert, n_random, level};
    spec.validate();
    return spec;
}

TransitionDataset mix_datasets(const TransitionDataset& expert_pool, const TransitionDataset& random_pool,
                               const MixSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (expert_pool.space != random_pool.space) throw InvalidArgument("pools have different spaces");
    expert_pool.validate();
    random_pool.validate();
    if (expert_pool.size() < spec.n_expert)
        throw InvalidArgument("expert pool has " + std::to_string(expert_pool.size()) + " records, " +
                              std::to_string(spec.n_expert) + " requested");
    if (random_pool.size() < spec.n_random)
        throw InvalidArgument("random pool has " + std::to_string(random_pool.size()) + " records, " +
                              std::to_string(spec.n_random) + " requested");

    Rng rng(seed);
    const auto pick_e = sample_without_replacement(expert_pool.size(), spec.n_expert, rng);
    const auto pick_r = sample_without_replacement(random_pool.size(), spec.n_random, rng);

    // (source, index) pairs, shuffled together.
    std::vector<std::pair<int, std::size_t>> order;
    order.reserve(pick_e.size() + pick_r.size());
    for (auto i : pick_e) order.emplace_back(0, i);
    for (auto i : pick_r) order.emplace_back(1, i);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    TransitionDataset out;
    out.space = expert_pool.space;
    out.role = DatasetRole::suboptimal;
    for (const auto& [src, i] : order) append_record(out, src == 0 ? expert_pool : random_pool, i);
    if (spec.n_expert > 0) append_initial_states(out, expert_pool);
    if (spec.n_random > 0) append_initial_states(out, random_pool);

    add_provenance(out, "mix_level", to_string(spec.level));
    add_provenance(out, "n_expert", std::to_string(spec.n_expert));
    add_provenance(out, "n_random", std::to_string(spec.n_random));
    add_provenance(out, "realized_ratio",
                   spec.n_random == 0 ? "inf"
                                      : format_double(static_cast<double>(spec.n_expert) /
                                                      static_cast<double>(spec.n_random)));
    add_provenance(out, "mix_seed", std::to_string(seed));
    out.validate();
    return out;
}

std::vector<unsigned char> serialize_dataset(const TransitionDataset& dataset) {
    dataset.validate();
    ByteWriter w;
    put_header(w, "RDXD", kDatasetVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(dataset.role));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(dataset.space.kind));
    w.put<std::uint32_t>(dataset.space.state_size);
    w.put<std::uint32_t>(dataset.space.action_size);
    w.put<std::uint64_t>(dataset.size());
    if (dataset.is_tabular()) {
        for (const auto& t : dataset.transitions) {
            w.put<std::int32_t>(t.state);
            w.put<std::int32_t>(t.action);
            w.put<std::int32_t>(t.next_state);
        }
    } else {
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            for (double x : dataset.state(i)) w.put<double>(x);
            for (double x : dataset.action(i)) w.put<double>(x);
            for (double x : dataset.next_state(i)) w.put<double>(x);
        }
    }
    w.put<std::uint64_t>(dataset.num_initial_states());
    if (dataset.is_tabular()) {
        for (auto s : dataset.initial_states) w.put<std::int32_t>(s);
    } else {
        for (double x : dataset.initial_state_values) w.put<double>(x);
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.provenance.size()));
    w.put_bytes(dataset.provenance);
    finish(w);
    return w.take();
}

TransitionDataset deserialize_dataset(const std::vector<unsigned char>& bytes) {
    auto r = open_container(bytes, "RDXD", kDatasetVersion);
    TransitionDataset d;
    const auto role = r.get<std::uint8_t>();
    const auto kind = r.get<std::uint8_t>();
    if (role > 2) throw FormatError("unknown dataset role");
    if (kind > 1) throw FormatError("unknown space kind");
    d.role = static_cast<DatasetRole>(role);
    d.space.kind = static_cast<SpaceKind>(kind);
    d.space.state_size = r.get<std::uint32_t>();
    d.space.action_size = r.get<std::uint32_t>();
    if (d.space.state_size == 0 || d.space.action_size == 0) throw FormatError("space has a zero dimension");
    const bool tabular = d.is_tabular();
    const std::size_t ds = d.space.state_size;
    const std::size_t da = d.space.action_size;

    const auto n = r.get<std::uint64_t>();
    require_items(r, n, tabular ? 12 : 8 * (2 * ds + da));
    for (std::uint64_t i = 0; i < n; ++i) {
        if (tabular) {
            TabularTransition t;
            t.state = r.get<std::int32_t>();
            t.action = r.get<std::int32_t>();
            t.next_state = r.get<std::int32_t>();
            d.transitions.push_back(t);
        } else {
            for (std::size_t j = 0; j < ds; ++j) d.states.push_back(r.get<double>());
            for (std::size_t j = 0; j < da; ++j) d.actions.push_back(r.get<double>());
            for (std::size_t j = 0; j < ds; ++j) d.next_states.push_back(r.get<double>());
        }
    }
    const auto n0 = r.get<std::uint64_t>();
    require_items(r, n0, tabular ? 4 : 8 * ds);
    for (std::uint64_t i = 0; i < n0; ++i) {
        if (tabular)
            d.initial_states.push_back(r.get<std::int32_t>());
        else
            for (std::size_t j = 0; j < ds; ++j) d.initial_state_values.push_back(r.get<double>());
    }
    const auto plen = r.get<std::uint32_t>();
    d.provenance = r.get_bytes(plen);
    if (r.remaining() != 0) throw FormatError("trailing bytes after dataset");
    d.validate();
    return d;
}

void save_dataset(const TransitionDataset& dataset, const std::string& path) {
    write_file(path, serialize_dataset(dataset));
}

TransitionDataset load_dataset(const std::string& path) { return deserialize_dataset(read_file(path)); }

std::vector<unsigned char> serialize_mdp(const TabularMdp& mdp) {
    ByteWriter w;
    put_header(w, "RDXM", kMdpVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(mdp.num_states()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(mdp.num_actions()));
    w.put<double>(mdp.discount());
    for (double p : mdp.initial_dist()) w.put<double>(p);
    for (double p : mdp.transitions()) w.put<double>(p);
    finish(w);
    return w.take();
}

TabularMdp deserialize_mdp(const std::vector<unsigned char>& bytes) {
    auto r = open_container(bytes, "RDXM", kMdpVersion);
    const auto S = r.get<std::uint32_t>();
    const auto A = r.get<std::uint32_t>();
    const double gamma = r.get<double>();
    const std::uint64_t total = static_cast<std::uint64_t>(S) + static_cast<std::uint64_t>(S) * A * S;
    if (S == 0 || A == 0) throw FormatError("MDP has a zero dimension");
    require_items(r, total, 8);
    std::vector<double> p0(S), T(static_cast<std::size_t>(S) * A * S);
    for (auto& x : p0) x = r.get<double>();
    for (auto& x : T) x = r.get<double>();
    if (r.remaining() != 0) throw FormatError("trailing bytes after MDP");
    return TabularMdp(static_cast<int>(S), static_cast<int>(A), std::move(T), std::move(p0), gamma);
}

void save_mdp(const TabularMdp& mdp, const std::string& path) { write_file(path, serialize_mdp(mdp)); }

TabularMdp load_mdp(const std::string& path) { return deserialize_mdp(read_file(path)); }

}  // namespace relaxdice

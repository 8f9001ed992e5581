#include "ctsynth/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctsynth/augment.hpp"
#include "ctsynth/rng.hpp"

namespace ctsynth {

std::vector<TrainingPair> build_training_set(const std::vector<Volume>& volumes,
                                             ConditionKind kind, std::uint64_t seed,
                                             std::int64_t edge, double pad_value,
                                             std::int64_t noise_peak, const BlockFilter& filter) {
    if (volumes.empty()) throw error(errc::empty_input, "no volumes to build pairs from");

    const auto transforms = enumerate_transforms();
    std::vector<TrainingPair> pairs;

    for (std::size_t vi = 0; vi < volumes.size(); ++vi) {
        const BlockGrid grid = make_block_grid(volumes[vi].dims, edge, pad_value);
        const Volume padded = pad_volume(volumes[vi], grid);
        for (const auto& t : transforms) {
            const Volume transformed = apply_transform(padded, t, grid);
            auto [tgrid, blocks] = partition(transformed, edge, pad_value);
            for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
                if (filter && !filter(blocks[bi])) continue;
                TrainingPair p;
                p.volume_index = static_cast<std::int32_t>(vi);
                p.transform_index = t.index;
                p.block_index = static_cast<std::int32_t>(bi);
                const std::uint64_t pair_seed =
                    mix_seed(seed, vi, static_cast<std::uint64_t>(t.index), bi);
                p.condition = make_condition(blocks[bi], kind, pair_seed, noise_peak);
                p.target = std::move(blocks[bi]);
                pairs.push_back(std::move(p));
            }
        }
    }
    return pairs;
}

std::string manifest_path_for(const std::string& dir) {
    return (std::filesystem::path(dir) / "manifest.txt").string();
}

namespace {

Volume block_to_volume(const VoxelBlock& b) {
    Volume v(b.edge, b.edge, b.edge);
    v.data = b.data;
    return v;
}

VoxelBlock volume_to_block(const Volume& v) {
    if (v.nx() != v.ny() || v.ny() != v.nz())
        throw error(errc::shape_mismatch, "block file is not a cube");
    VoxelBlock b(v.nx(), {0, 0, 0});
    b.data = v.data;
    return b;
}

std::string pair_basename(const TrainingPair& p, const char* role) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "vol%d_t%d_b%d_%s.ctv", p.volume_index, p.transform_index,
                  p.block_index, role);
    return buf;
}

} // namespace

void write_pairs(const std::string& dir, const std::vector<TrainingPair>& pairs,
                 ConditionKind kind, std::uint64_t seed, std::int64_t edge) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);

    std::ostringstream manifest;
    manifest << "# ctsynth training pairs\n";
    manifest << "seed " << seed << "\n";
    manifest << "edge " << edge << "\n";
    manifest << "condition " << condition_name(kind) << "\n";
    manifest << "pairs " << pairs.size() << "\n";

    for (const auto& p : pairs) {
        const std::string cond_name = pair_basename(p, "cond");
        const std::string target_name = pair_basename(p, "target");
        save_volume(block_to_volume(p.condition), (root / cond_name).string());
        save_volume(block_to_volume(p.target), (root / target_name).string());
        manifest << cond_name << " " << target_name << "\n";
    }

    std::ofstream mf(manifest_path_for(dir), std::ios::trunc);
    if (!mf) throw error(errc::io_failure, "cannot create manifest in " + dir);
    mf << manifest.str();
    if (!mf) throw error(errc::io_failure, "manifest write failed in " + dir);
}

PairSet load_pairs(const std::string& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf) throw error(errc::io_failure, "cannot open " + manifest_path);
    const std::filesystem::path root = std::filesystem::path(manifest_path).parent_path();

    PairSet set;
    std::size_t expected = 0;
    std::string line;
    while (std::getline(mf, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "seed") {
            ls >> set.seed;
        } else if (head == "edge") {
            ls >> set.edge;
        } else if (head == "condition") {
            std::string name;
            ls >> name;
            set.kind = condition_from_name(name);
        } else if (head == "pairs") {
            ls >> expected;
        } else {
            std::string target_name;
            ls >> target_name;
            if (target_name.empty())
                throw error(errc::io_failure, "malformed manifest line: " + line);
            TrainingPair p;
            p.condition = volume_to_block(load_volume((root / head).string()));
            p.target = volume_to_block(load_volume((root / target_name).string()));
            // vol{V}_t{T}_b{B}_cond.ctv
            std::sscanf(head.c_str(), "vol%d_t%d_b%d_", &p.volume_index, &p.transform_index,
                        &p.block_index);
            set.pairs.push_back(std::move(p));
        }
    }
    if (expected != set.pairs.size())
        throw error(errc::io_failure, "manifest pair count does not match listed files");
    if (set.pairs.empty()) throw error(errc::empty_input, "manifest lists no pairs");
    return set;
}

} // namespace ctsynth

#include "tanhseed/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "tanhseed/rng.hpp"

namespace tanhseed {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("truncated file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<std::uint8_t> read_exact(std::istream& in, std::size_t n, const std::string& path) {
    std::vector<std::uint8_t> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n)))
        throw std::runtime_error("truncated file: " + path);
    return buf;
}

double to_unit(std::uint8_t v, bool normalize) {
    double x = static_cast<double>(v);
    return normalize ? x / 255.0 - 0.5 : x;
}

// Largest-remainder apportionment of `total` across class counts, each
// share clamped to [lo_c, counts[c]] where lo_c is lo (or 0 if the class
// is empty). Ties go to the lower class id.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& counts, std::size_t total,
                                   std::size_t lo, std::size_t hi_slack) {
    std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    std::vector<std::size_t> share(counts.size(), 0);
    std::vector<std::pair<double, std::size_t>> rem;  // (-remainder, class)
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        double exact = static_cast<double>(total) * static_cast<double>(counts[c]) /
                       static_cast<double>(n);
        share[c] = static_cast<std::size_t>(exact);
        std::size_t cap = counts[c] - std::min(counts[c], hi_slack);
        share[c] = std::min(std::max(share[c], lo), cap);
        assigned += share[c];
        rem.emplace_back(-(exact - std::floor(exact)), c);
    }
    std::sort(rem.begin(), rem.end());
    // hand out the shortfall by remainder; take back any overshoot from
    // the largest shares
    std::size_t guard = 0;
    while (assigned < total && guard < 4 * counts.size() + 4) {
        bool moved = false;
        for (auto& [r, c] : rem) {
            std::size_t cap = counts[c] - std::min(counts[c], hi_slack);
            if (share[c] < cap) {
                ++share[c];
                ++assigned;
                moved = true;
                if (assigned == total) break;
            }
        }
        if (!moved) break;
        ++guard;
    }
    while (assigned > total) {
        auto it = std::max_element(share.begin(), share.end());
        if (*it <= lo) break;
        --*it;
        --assigned;
    }
    return share;
}

std::vector<std::vector<std::size_t>> class_indices(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
    return by_class;
}

Dataset gather_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.num_classes = ds.num_classes;
    out.features = Mat(rows.size(), ds.dim());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = ds.features.row(rows[i]);
        std::copy(src, src + ds.dim(), out.features.row(i));
        out.labels[i] = ds.labels[rows[i]];
    }
    return out;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 bool normalize) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw std::runtime_error("cannot open " + images_path);
    if (read_be32(imgs, images_path) != 0x00000803u)
        throw std::runtime_error("bad image magic in " + images_path);
    std::size_t count = read_be32(imgs, images_path);
    std::size_t rows = read_be32(imgs, images_path);
    std::size_t cols = read_be32(imgs, images_path);
    auto pixels = read_exact(imgs, count * rows * cols, images_path);

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw std::runtime_error("cannot open " + labels_path);
    if (read_be32(labs, labels_path) != 0x00000801u)
        throw std::runtime_error("bad label magic in " + labels_path);
    std::size_t lcount = read_be32(labs, labels_path);
    if (lcount != count)
        throw std::runtime_error("image/label count mismatch: " + images_path);
    auto labels = read_exact(labs, lcount, labels_path);

    Dataset ds;
    ds.features = Mat(count, rows * cols);
    ds.labels.resize(count);
    int max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < rows * cols; ++j)
            ds.features(i, j) = to_unit(pixels[i * rows * cols + j], normalize);
        ds.labels[i] = labels[i];
        max_label = std::max(max_label, static_cast<int>(labels[i]));
    }
    ds.num_classes = std::max(10, max_label + 1);
    return ds;
}

void write_idx(const std::string& images_path, const std::string& labels_path,
               std::span<const std::uint8_t> pixels, std::size_t count, std::size_t rows,
               std::size_t cols, std::span<const std::uint8_t> labels) {
    if (pixels.size() != count * rows * cols || labels.size() != count)
        throw std::invalid_argument("write_idx: size mismatch");
    std::ofstream imgs(images_path, std::ios::binary);
    if (!imgs) throw std::runtime_error("cannot open " + images_path);
    write_be32(imgs, 0x00000803u);
    write_be32(imgs, static_cast<std::uint32_t>(count));
    write_be32(imgs, static_cast<std::uint32_t>(rows));
    write_be32(imgs, static_cast<std::uint32_t>(cols));
    imgs.write(reinterpret_cast<const char*>(pixels.data()),
               static_cast<std::streamsize>(pixels.size()));
    std::ofstream labs(labels_path, std::ios::binary);
    if (!labs) throw std::runtime_error("cannot open " + labels_path);
    write_be32(labs, 0x00000801u);
    write_be32(labs, static_cast<std::uint32_t>(count));
    labs.write(reinterpret_cast<const char*>(labels.data()),
               static_cast<std::streamsize>(labels.size()));
    if (!imgs || !labs) throw std::runtime_error("write_idx: write failed");
}

Dataset load_cifar10(const std::vector<std::string>& batch_paths, bool normalize) {
    if (batch_paths.empty()) throw std::invalid_argument("load_cifar10: no files");
    constexpr std::size_t kRecord = 3073;  // label byte + 32*32*3 pixels
    std::vector<std::uint8_t> raw;
    for (const auto& path : batch_paths) {
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::size_t len = static_cast<std::size_t>(in.tellg());
        if (len == 0 || len % kRecord != 0)
            throw std::runtime_error("bad record length in " + path);
        in.seekg(0);
        std::size_t off = raw.size();
        raw.resize(off + len);
        if (!in.read(reinterpret_cast<char*>(raw.data() + off),
                     static_cast<std::streamsize>(len)))
            throw std::runtime_error("truncated file: " + path);
    }
    std::size_t count = raw.size() / kRecord;
    Dataset ds;
    ds.num_classes = 10;
    ds.features = Mat(count, kRecord - 1);
    ds.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* rec = raw.data() + i * kRecord;
        if (rec[0] > 9) throw std::runtime_error("label out of range in CIFAR data");
        ds.labels[i] = rec[0];
        for (std::size_t j = 0; j + 1 < kRecord; ++j)
            ds.features(i, j) = to_unit(rec[j + 1], normalize);
    }
    return ds;
}

std::pair<Dataset, Dataset> split_stratified(const Dataset& ds, double val_fraction,
                                             std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw std::invalid_argument("split_stratified: val_fraction must be in (0, 1)");
    if (ds.num_classes <= 0 || ds.size() == 0)
        throw std::invalid_argument("split_stratified: empty dataset");

    auto by_class = class_indices(ds);
    std::vector<std::size_t> counts;
    for (auto& members : by_class) {
        if (!members.empty() && members.size() < 2)
            throw std::invalid_argument("split_stratified: class with fewer than 2 samples");
        counts.push_back(members.size());
    }

    std::size_t total = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(ds.size())));
    // each side keeps at least one sample per class
    auto share = apportion(counts, total, 1, 1);

    std::vector<std::size_t> val_rows, train_rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.empty()) continue;
        Rng rng(mix_seed(seed, c));
        std::shuffle(members.begin(), members.end(), rng.engine());
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < share[c] ? val_rows : train_rows).push_back(members[i]);
    }
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {gather_rows(ds, train_rows), gather_rows(ds, val_rows)};
}

Dataset subset_stratified(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > ds.size())
        throw std::invalid_argument("subset_stratified: k out of range");
    auto by_class = class_indices(ds);
    std::vector<std::size_t> counts;
    for (auto& members : by_class) counts.push_back(members.size());
    auto share = apportion(counts, k, 0, 0);

    std::vector<std::size_t> rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.empty()) continue;
        Rng rng(mix_seed(seed, c));
        std::shuffle(members.begin(), members.end(), rng.engine());
        rows.insert(rows.end(), members.begin(), members.begin() + share[c]);
    }
    std::sort(rows.begin(), rows.end());
    return gather_rows(ds, rows);
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
    if (n == 0 || batch_size == 0)
        throw std::invalid_argument("epoch_batches: n and batch_size must be positive");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(mix_seed(seed, epoch));
    std::shuffle(perm.begin(), perm.end(), rng.engine());

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(perm.begin() + start, perm.begin() + end);
    }
    return batches;
}

void gather_batch(const Dataset& ds, std::span<const std::size_t> idx, Mat& features_out,
                  std::vector<int>& labels_out) {
    features_out = Mat(ds.dim(), idx.size());
    labels_out.resize(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= ds.size()) throw std::invalid_argument("gather_batch: index out of range");
        const double* src = ds.features.row(idx[j]);
        for (std::size_t i = 0; i < ds.dim(); ++i) features_out(i, j) = src[i];
        labels_out[j] = ds.labels[idx[j]];
    }
}

Dataset make_synthetic_images(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("make_synthetic_images: n must be positive");
    constexpr std::size_t kSide = 28, kDim = kSide * kSide;
    constexpr int kClasses = 10;

    Rng rng(seed);
    // one fixed prototype per class: three soft blobs on the canvas
    std::vector<std::vector<double>> protos(kClasses, std::vector<double>(kDim, 0.0));
    for (int c = 0; c < kClasses; ++c) {
        for (int blob = 0; blob < 3; ++blob) {
            double cx = rng.uniform(6.0, 22.0);
            double cy = rng.uniform(6.0, 22.0);
            double sig = rng.uniform(2.0, 4.5);
            double amp = rng.uniform(0.6, 1.0);
            for (std::size_t y = 0; y < kSide; ++y)
                for (std::size_t x = 0; x < kSide; ++x) {
                    double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                    protos[c][y * kSide + x] +=
                        amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sig * sig));
                }
        }
        for (double& v : protos[c]) v = std::clamp(v, 0.0, 1.0);
    }

    Dataset ds;
    ds.num_classes = kClasses;
    ds.features = Mat(n, kDim);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int c = static_cast<int>(i % kClasses);
        ds.labels[i] = c;
        long dy = rng.uniform_int(-2, 2);
        long dx = rng.uniform_int(-2, 2);
        const long side = static_cast<long>(kSide);
        double* out = ds.features.row(i);
        for (std::size_t y = 0; y < kSide; ++y)
            for (std::size_t x = 0; x < kSide; ++x) {
                // circular shift of the prototype, then noise and the same
                // quantize-and-center transform the byte loaders apply
                auto sy = static_cast<std::size_t>((static_cast<long>(y) - dy + side) % side);
                auto sx = static_cast<std::size_t>((static_cast<long>(x) - dx + side) % side);
                double v = protos[c][sy * kSide + sx] + rng.normal(0.0, 0.18);
                v = std::clamp(v, 0.0, 1.0);
                v = std::floor(v * 255.0) / 255.0 - 0.5;
                out[y * kSide + x] = v;
            }
    }
    return ds;
}

}  // namespace tanhseed

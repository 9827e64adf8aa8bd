#include "raterboot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "raterboot/error.hpp"

namespace raterboot {

// ---------------------------------------------------------------------------
// LabelDomain
// ---------------------------------------------------------------------------

LabelDomain::LabelDomain(std::vector<std::int32_t> codes) : codes_(std::move(codes)) {
    if (codes_.size() < 2) fail("DegenerateDomain", "label domain needs at least 2 classes");
    std::vector<std::int32_t> sorted = codes_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        fail("DegenerateDomain", "duplicate label codes");
    if (sorted != codes_) fail("DegenerateDomain", "label codes must be sorted ascending");
    if (codes_.front() < 0) fail("DegenerateDomain", "label codes must be non-negative");

    index_.assign(static_cast<std::size_t>(codes_.back()) + 1, -1);
    for (std::size_t i = 0; i < codes_.size(); ++i)
        index_[static_cast<std::size_t>(codes_[i])] = static_cast<std::int32_t>(i);
}

LabelDomain LabelDomain::first_n(int n_classes) {
    std::vector<std::int32_t> codes;
    for (int c = 0; c < n_classes; ++c) codes.push_back(c);
    return LabelDomain(std::move(codes));
}

bool LabelDomain::contains(std::int32_t code) const {
    return code >= 0 && code < static_cast<std::int32_t>(index_.size()) &&
           index_[static_cast<std::size_t>(code)] >= 0;
}

int LabelDomain::index_of(std::int32_t code) const {
    if (!contains(code)) fail("UnknownLabel", "label code " + std::to_string(code) + " not in domain");
    return index_[static_cast<std::size_t>(code)];
}

// ---------------------------------------------------------------------------
// AnnotationDataset
// ---------------------------------------------------------------------------

std::int32_t AnnotationDataset::label_at(std::uint32_t item, std::uint32_t rater) const {
    const auto& ratings = by_item_[item];
    if (fully_crossed_) return ratings[rater].label; // one rating per rater, sorted
    auto it = std::lower_bound(ratings.begin(), ratings.end(), rater,
                               [](const Rating& r, std::uint32_t key) { return r.rater < key; });
    if (it == ratings.end() || it->rater != rater)
        fail("UnknownLabel", "no rating for item " + item_ids_[item] + ", rater " + rater_ids_[rater]);
    return it->label;
}

DatasetSummary AnnotationDataset::summary() const {
    DatasetSummary s;
    s.n_items = n_items();
    s.n_raters = n_raters();
    s.n_ratings = n_ratings_;
    for (const auto& ratings : by_item_) ++s.ratings_per_item[ratings.size()];
    s.fully_crossed = fully_crossed_;
    if (batches_) s.batch_size = batches_->batch_size;
    return s;
}

bool AnnotationDataset::operator==(const AnnotationDataset& other) const {
    return item_ids_ == other.item_ids_ && rater_ids_ == other.rater_ids_ &&
           domain_ == other.domain_ && by_item_ == other.by_item_ && batches_ == other.batches_;
}

namespace {
std::uint64_t compute_hash(const AnnotationDataset& d);
} // namespace

// Assembles a dataset from interned parts; validates the structural
// invariants shared by every construction path.
struct DatasetAssembler {
    static AnnotationDataset assemble(std::vector<std::string> item_ids,
                                      std::vector<std::string> rater_ids, LabelDomain domain,
                                      std::vector<std::vector<Rating>> by_item,
                                      std::optional<BatchMap> batches) {
        AnnotationDataset d;
        d.item_ids_ = std::move(item_ids);
        d.rater_ids_ = std::move(rater_ids);
        d.domain_ = std::move(domain);
        d.by_item_ = std::move(by_item);
        d.batches_ = std::move(batches);

        if (d.item_ids_.empty() || d.rater_ids_.empty()) fail("EmptyDataset", "no items or raters");

        std::vector<bool> rater_seen(d.rater_ids_.size(), false);
        d.n_ratings_ = 0;
        for (std::size_t i = 0; i < d.by_item_.size(); ++i) {
            auto& ratings = d.by_item_[i];
            if (ratings.empty()) fail("EmptyDataset", "item " + d.item_ids_[i] + " has no ratings");
            std::sort(ratings.begin(), ratings.end(),
                      [](const Rating& a, const Rating& b) { return a.rater < b.rater; });
            for (std::size_t j = 0; j < ratings.size(); ++j) {
                if (j > 0 && ratings[j].rater == ratings[j - 1].rater)
                    fail("DuplicateRating", "item " + d.item_ids_[i] + ", rater " +
                                                d.rater_ids_[ratings[j].rater]);
                if (!d.domain_.contains(ratings[j].label))
                    fail("UnknownLabel", "label " + std::to_string(ratings[j].label));
                rater_seen[ratings[j].rater] = true;
            }
            d.n_ratings_ += ratings.size();
        }
        for (std::size_t r = 0; r < rater_seen.size(); ++r)
            if (!rater_seen[r]) fail("EmptyDataset", "rater " + d.rater_ids_[r] + " has no ratings");

        d.fully_crossed_ = d.n_ratings_ == d.n_items() * d.n_raters();

        if (d.batches_) {
            const auto& bm = *d.batches_;
            if (bm.batch_size <= 0 || bm.batches.empty()) fail("NotBatchable", "empty batch map");
            std::vector<bool> covered(d.n_items(), false);
            for (const Batch& b : bm.batches) {
                if (static_cast<int>(b.items.size()) != bm.batch_size)
                    fail("NotBatchable", "batch size mismatch");
                if (b.raters.empty()) fail("NotBatchable", "batch with empty rater pool");
                for (std::uint32_t item : b.items) {
                    if (covered[item]) fail("NotBatchable", "batches overlap");
                    covered[item] = true;
                    for (std::uint32_t rater : b.raters) d.label_at(item, rater); // must exist
                }
            }
            if (std::find(covered.begin(), covered.end(), false) != covered.end())
                fail("NotBatchable", "batches do not cover all items");
        }

        d.hash_ = compute_hash(d);
        return d;
    }

    static AnnotationDataset with_batches(const AnnotationDataset& src, BatchMap batches) {
        AnnotationDataset out = src;
        out.batches_ = std::move(batches);
        out.hash_ = compute_hash(out);
        return out;
    }
};

namespace {

std::uint64_t compute_hash(const AnnotationDataset& d) {
    Fnv64 h;
    h.add_string("RBDS1");
    for (const auto& id : d.item_ids()) h.add_string(id);
    for (const auto& id : d.rater_ids()) h.add_string(id);
    for (std::int32_t c : d.domain().codes()) h.add_i64(c);
    for (std::uint32_t i = 0; i < d.n_items(); ++i) {
        for (const Rating& r : d.ratings_of(i)) {
            h.add_u64(i);
            h.add_u64(r.rater);
            h.add_i64(r.label);
        }
    }
    if (d.batch_map()) {
        h.add_i64(d.batch_map()->batch_size);
        for (const Batch& b : d.batch_map()->batches) {
            for (auto i : b.items) h.add_u64(i);
            for (auto r : b.raters) h.add_u64(r);
        }
    }
    return h.value();
}

} // namespace

// ---------------------------------------------------------------------------
// DatasetBuilder
// ---------------------------------------------------------------------------

void DatasetBuilder::add(std::string item_id, std::string rater_id, std::int32_t label) {
    triples_.push_back({std::move(item_id), std::move(rater_id), label});
}

AnnotationDataset DatasetBuilder::build() const {
    if (triples_.empty()) fail("EmptyDataset", "no ratings");

    std::set<std::string> item_set, rater_set;
    for (const auto& t : triples_) {
        item_set.insert(t.item);
        rater_set.insert(t.rater);
    }
    std::vector<std::string> item_ids(item_set.begin(), item_set.end());
    std::vector<std::string> rater_ids(rater_set.begin(), rater_set.end());

    std::unordered_map<std::string, std::uint32_t> item_index, rater_index;
    for (std::uint32_t i = 0; i < item_ids.size(); ++i) item_index[item_ids[i]] = i;
    for (std::uint32_t r = 0; r < rater_ids.size(); ++r) rater_index[rater_ids[r]] = r;

    LabelDomain domain;
    if (explicit_domain_) {
        domain = *explicit_domain_;
    } else {
        std::set<std::int32_t> codes;
        for (const auto& t : triples_) codes.insert(t.label);
        domain = LabelDomain(std::vector<std::int32_t>(codes.begin(), codes.end()));
    }

    std::vector<std::vector<Rating>> by_item(item_ids.size());
    for (const auto& t : triples_)
        by_item[item_index[t.item]].push_back({rater_index[t.rater], t.label});

    return DatasetAssembler::assemble(std::move(item_ids), std::move(rater_ids), std::move(domain),
                    std::move(by_item), std::nullopt);
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

// One CSV record; supports quoted fields with doubled quotes.
bool split_csv_row(const std::string& line, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // tolerate CRLF
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return !in_quotes;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    fail("MalformedRow", "line 1: column '" + name + "' not found in header");
}

} // namespace

AnnotationDataset ingest_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) fail("EmptyDataset", "empty input");

    std::vector<std::string> header;
    if (!split_csv_row(line, header)) fail("MalformedRow", "line 1: unterminated quote");
    const std::size_t item_col = find_column(header, schema.item_col);
    const std::size_t rater_col = find_column(header, schema.rater_col);
    const std::size_t label_col = find_column(header, schema.label_col);

    DatasetBuilder builder;
    if (schema.label_dict) {
        std::set<std::int32_t> codes;
        for (const auto& [_, code] : *schema.label_dict) codes.insert(code);
        builder.set_domain(LabelDomain(std::vector<std::int32_t>(codes.begin(), codes.end())));
    }

    std::vector<std::string> fields;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!split_csv_row(line, fields))
            fail("MalformedRow", "line " + std::to_string(line_no) + ": unterminated quote");
        if (fields.size() != header.size())
            fail("MalformedRow", "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));

        const std::string& raw_label = fields[label_col];
        std::int32_t label;
        if (schema.label_dict) {
            auto it = schema.label_dict->find(raw_label);
            if (it == schema.label_dict->end())
                fail("UnknownLabel",
                     "line " + std::to_string(line_no) + ": '" + raw_label + "' not in label dictionary");
            label = it->second;
        } else {
            try {
                std::size_t pos = 0;
                label = std::stoi(raw_label, &pos);
                if (pos != raw_label.size()) throw std::invalid_argument(raw_label);
            } catch (const std::exception&) {
                fail("UnknownLabel",
                     "line " + std::to_string(line_no) + ": '" + raw_label + "' is not an integer label");
            }
        }
        builder.add(fields[item_col], fields[rater_col], label);
    }
    return builder.build();
}

void serialize_csv(const AnnotationDataset& d, std::ostream& out) {
    out << "item_id,rater_id,label\n";
    for (std::uint32_t i = 0; i < d.n_items(); ++i)
        for (const Rating& r : d.ratings_of(i))
            out << d.item_id(i) << ',' << d.rater_id(r.rater) << ',' << r.label << '\n';
}

// ---------------------------------------------------------------------------
// RBDS1 container
// ---------------------------------------------------------------------------

void save_dataset(const AnnotationDataset& d, const std::string& path) {
    nlohmann::json j;
    j["version"] = 1;
    j["domain"] = d.domain().codes();
    j["items"] = d.item_ids();
    j["raters"] = d.rater_ids();
    nlohmann::json ratings = nlohmann::json::array();
    for (std::uint32_t i = 0; i < d.n_items(); ++i)
        for (const Rating& r : d.ratings_of(i))
            ratings.push_back({i, r.rater, r.label});
    j["ratings"] = std::move(ratings);
    if (d.batch_map()) {
        j["batch_size"] = d.batch_map()->batch_size;
        nlohmann::json batches = nlohmann::json::array();
        for (const Batch& b : d.batch_map()->batches)
            batches.push_back({{"items", b.items}, {"raters", b.raters}});
        j["batches"] = std::move(batches);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + path);
    out << "RBDS1\n" << j.dump() << '\n';
    if (!out) fail("IoError", "write failed for " + path);
}

AnnotationDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("IoError", "cannot read " + path);
    std::string magic;
    if (!std::getline(in, magic) || magic != "RBDS1")
        fail("IoError", path + " is not an RBDS1 dataset file");

    try {
        nlohmann::json j;
        in >> j;
        if (j.value("version", 0) != 1) fail("IoError", path + ": unsupported container version");

        std::vector<std::string> item_ids = j.at("items").get<std::vector<std::string>>();
        std::vector<std::string> rater_ids = j.at("raters").get<std::vector<std::string>>();
        LabelDomain domain(j.at("domain").get<std::vector<std::int32_t>>());

        std::vector<std::vector<Rating>> by_item(item_ids.size());
        for (const auto& row : j.at("ratings")) {
            std::uint32_t item = row.at(0).get<std::uint32_t>();
            if (item >= item_ids.size()) fail("IoError", path + ": item index out of range");
            std::uint32_t rater = row.at(1).get<std::uint32_t>();
            if (rater >= rater_ids.size()) fail("IoError", path + ": rater index out of range");
            by_item[item].push_back({rater, row.at(2).get<std::int32_t>()});
        }

        std::optional<BatchMap> batches;
        if (j.contains("batch_size")) {
            BatchMap bm;
            bm.batch_size = j.at("batch_size").get<int>();
            for (const auto& bj : j.at("batches")) {
                Batch b;
                b.items = bj.at("items").get<std::vector<std::uint32_t>>();
                b.raters = bj.at("raters").get<std::vector<std::uint32_t>>();
                bm.batches.push_back(std::move(b));
            }
            batches = std::move(bm);
        }

        return DatasetAssembler::assemble(std::move(item_ids), std::move(rater_ids),
                                          std::move(domain), std::move(by_item), std::move(batches));
    } catch (const nlohmann::json::exception& e) {
        fail("IoError", path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// infer_batches / downsample_raters
// ---------------------------------------------------------------------------

AnnotationDataset infer_batches(const AnnotationDataset& d, int batch_size) {
    if (batch_size <= 0) fail("InvalidParams", "batch_size must be positive");
    if (d.batch_map()) fail("NotBatchable", "dataset already has a batch map");

    // group items by their exact rater set
    std::map<std::vector<std::uint32_t>, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < d.n_items(); ++i) {
        std::vector<std::uint32_t> raters;
        raters.reserve(d.ratings_of(i).size());
        for (const Rating& r : d.ratings_of(i)) raters.push_back(r.rater);
        groups[std::move(raters)].push_back(i);
    }

    BatchMap bm;
    bm.batch_size = batch_size;
    for (auto& [raters, items] : groups) {
        if (items.size() % static_cast<std::size_t>(batch_size) != 0)
            fail("NotBatchable", "rater-set group of " + std::to_string(items.size()) +
                                     " items not divisible by batch size " + std::to_string(batch_size));
        std::sort(items.begin(), items.end()); // dense indices follow item-id order
        for (std::size_t start = 0; start < items.size(); start += static_cast<std::size_t>(batch_size)) {
            Batch b;
            b.items.assign(items.begin() + static_cast<std::ptrdiff_t>(start),
                           items.begin() + static_cast<std::ptrdiff_t>(start + batch_size));
            b.raters = raters;
            bm.batches.push_back(std::move(b));
        }
    }
    // deterministic order: by first item index
    std::sort(bm.batches.begin(), bm.batches.end(),
              [](const Batch& a, const Batch& b) { return a.items.front() < b.items.front(); });

    return DatasetAssembler::with_batches(d, std::move(bm));
}

AnnotationDataset downsample_raters(const AnnotationDataset& d, int k, std::uint64_t seed) {
    if (k <= 0) fail("InvalidParams", "k must be positive");
    if (static_cast<std::size_t>(k) > d.n_raters())
        fail("KTooLarge", "k=" + std::to_string(k) + " exceeds " + std::to_string(d.n_raters()) + " raters");

    // partial Fisher-Yates over rater indices; depends only on (seed, k, rater order)
    std::vector<std::uint32_t> pool(d.n_raters());
    for (std::uint32_t r = 0; r < d.n_raters(); ++r) pool[r] = r;
    Stream rng(SeedSpec{seed, {}});
    for (int i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<std::uint32_t> chosen(pool.begin(), pool.begin() + k);
    std::sort(chosen.begin(), chosen.end());

    std::vector<std::int32_t> rater_remap(d.n_raters(), -1);
    std::vector<std::string> rater_ids;
    rater_ids.reserve(chosen.size());
    for (std::uint32_t r : chosen) {
        rater_remap[r] = static_cast<std::int32_t>(rater_ids.size());
        rater_ids.push_back(d.rater_id(r));
    }

    std::vector<std::vector<Rating>> by_item(d.n_items());
    for (std::uint32_t i = 0; i < d.n_items(); ++i) {
        for (const Rating& r : d.ratings_of(i))
            if (rater_remap[r.rater] >= 0)
                by_item[i].push_back({static_cast<std::uint32_t>(rater_remap[r.rater]), r.label});
        if (by_item[i].empty())
            fail("ItemLeftEmpty", "item " + d.item_id(i) + " has no ratings from the selected raters");
    }

    // batch map does not survive: pools may no longer cross their items
    return DatasetAssembler::assemble(d.item_ids(), std::move(rater_ids), d.domain(), std::move(by_item), std::nullopt);
}

// ---------------------------------------------------------------------------
// synth_generate
// ---------------------------------------------------------------------------

namespace {

double norm_draw(Stream& rng) {
    // Box-Muller, one value per call
    double u1 = rng.next_double_pos();
    double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Marsaglia-Tsang
double gamma_draw(Stream& rng, double alpha) {
    if (alpha < 1.0) {
        double u = rng.next_double_pos();
        return gamma_draw(rng, alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = norm_draw(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = rng.next_double_pos();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

std::vector<double> dirichlet_draw(Stream& rng, int n, double concentration) {
    std::vector<double> w(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& x : w) {
        x = gamma_draw(rng, concentration);
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

int categorical_draw(Stream& rng, const std::vector<double>& weights) {
    double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < weights.size(); ++c) {
        acc += weights[c];
        if (u < acc) return static_cast<int>(c);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::string padded_id(char prefix, int index, int width) {
    std::string digits = std::to_string(index);
    std::string out(1, prefix);
    out.append(static_cast<std::size_t>(width) - std::min<std::size_t>(digits.size(), static_cast<std::size_t>(width)), '0');
    out += digits;
    return out;
}

} // namespace

AnnotationDataset synth_generate(const SynthSpec& spec) {
    if (spec.n_items <= 0 || spec.n_raters <= 0) fail("InvalidParams", "items and raters must be positive");
    const int C = spec.domain.size();
    if (spec.labels.rater_bias < 0.0 || spec.labels.rater_bias >= 1.0)
        fail("InvalidParams", "rater_bias must be in [0, 1)");
    if (spec.labels.item_concentration <= 0.0 || spec.labels.rater_concentration <= 0.0)
        fail("InvalidParams", "concentrations must be positive");

    int n_batches = 0;
    switch (spec.structure.kind) {
        case SynthStructure::Kind::Crossed:
            break;
        case SynthStructure::Kind::Batched:
            if (spec.structure.batch_size <= 0 || spec.n_items % spec.structure.batch_size != 0)
                fail("InvalidParams", "items must divide evenly into batches");
            n_batches = spec.n_items / spec.structure.batch_size;
            if (spec.n_raters < n_batches)
                fail("InvalidParams", "need at least one rater per batch");
            break;
        case SynthStructure::Kind::Sparse:
            if (!(spec.structure.density > 0.0 && spec.structure.density <= 1.0))
                fail("InvalidParams", "density must be in (0, 1]");
            break;
    }

    Stream rng(SeedSpec{spec.seed, {}});

    std::vector<std::vector<double>> item_weights = spec.labels.item_weights;
    if (item_weights.empty()) {
        item_weights.reserve(static_cast<std::size_t>(spec.n_items));
        for (int i = 0; i < spec.n_items; ++i)
            item_weights.push_back(dirichlet_draw(rng, C, spec.labels.item_concentration));
    } else if (item_weights.size() != static_cast<std::size_t>(spec.n_items)) {
        fail("InvalidParams", "item_weights must have one row per item");
    }

    std::vector<std::vector<double>> rater_prefs;
    if (spec.labels.rater_bias > 0.0) {
        rater_prefs.reserve(static_cast<std::size_t>(spec.n_raters));
        for (int r = 0; r < spec.n_raters; ++r)
            rater_prefs.push_back(dirichlet_draw(rng, C, spec.labels.rater_concentration));
    }

    auto draw_label = [&](int item, int rater) {
        const std::vector<double>& w =
            (!rater_prefs.empty() && rng.next_double() < spec.labels.rater_bias)
                ? rater_prefs[static_cast<std::size_t>(rater)]
                : item_weights[static_cast<std::size_t>(item)];
        return spec.domain.code_at(categorical_draw(rng, w));
    };

    const int id_width = static_cast<int>(std::to_string(std::max(spec.n_items, spec.n_raters)).size());
    std::vector<std::string> item_ids, rater_ids;
    for (int i = 0; i < spec.n_items; ++i) item_ids.push_back(padded_id('i', i, id_width));
    for (int r = 0; r < spec.n_raters; ++r) rater_ids.push_back(padded_id('r', r, id_width));

    std::vector<std::vector<Rating>> by_item(static_cast<std::size_t>(spec.n_items));
    std::optional<BatchMap> batches;

    switch (spec.structure.kind) {
        case SynthStructure::Kind::Crossed: {
            for (int i = 0; i < spec.n_items; ++i)
                for (int r = 0; r < spec.n_raters; ++r)
                    by_item[static_cast<std::size_t>(i)].push_back(
                        {static_cast<std::uint32_t>(r), draw_label(i, r)});
            break;
        }
        case SynthStructure::Kind::Batched: {
            // raters split into n_batches contiguous pools, as even as possible
            BatchMap bm;
            bm.batch_size = spec.structure.batch_size;
            int rater_cursor = 0;
            for (int b = 0; b < n_batches; ++b) {
                int pool_size = spec.n_raters / n_batches + (b < spec.n_raters % n_batches ? 1 : 0);
                Batch batch;
                for (int j = 0; j < pool_size; ++j)
                    batch.raters.push_back(static_cast<std::uint32_t>(rater_cursor++));
                for (int j = 0; j < spec.structure.batch_size; ++j) {
                    int item = b * spec.structure.batch_size + j;
                    batch.items.push_back(static_cast<std::uint32_t>(item));
                    for (std::uint32_t r : batch.raters)
                        by_item[static_cast<std::size_t>(item)].push_back(
                            {r, draw_label(item, static_cast<int>(r))});
                }
                bm.batches.push_back(std::move(batch));
            }
            batches = std::move(bm);
            break;
        }
        case SynthStructure::Kind::Sparse: {
            for (int i = 0; i < spec.n_items; ++i)
                for (int r = 0; r < spec.n_raters; ++r)
                    if (rng.next_double() < spec.structure.density)
                        by_item[static_cast<std::size_t>(i)].push_back(
                            {static_cast<std::uint32_t>(r), draw_label(i, r)});

            // patch empty items and unused raters so the dataset invariants hold
            std::vector<bool> rater_used(static_cast<std::size_t>(spec.n_raters), false);
            for (const auto& ratings : by_item)
                for (const Rating& r : ratings) rater_used[r.rater] = true;
            for (int i = 0; i < spec.n_items; ++i) {
                if (by_item[static_cast<std::size_t>(i)].empty()) {
                    int r = static_cast<int>(rng.index_below(static_cast<std::size_t>(spec.n_raters)));
                    by_item[static_cast<std::size_t>(i)].push_back(
                        {static_cast<std::uint32_t>(r), draw_label(i, r)});
                    rater_used[static_cast<std::size_t>(r)] = true;
                }
            }
            for (int r = 0; r < spec.n_raters; ++r) {
                if (!rater_used[static_cast<std::size_t>(r)]) {
                    int i = static_cast<int>(rng.index_below(static_cast<std::size_t>(spec.n_items)));
                    auto& ratings = by_item[static_cast<std::size_t>(i)];
                    bool has = false;
                    for (const Rating& existing : ratings)
                        if (existing.rater == static_cast<std::uint32_t>(r)) has = true;
                    if (!has)
                        ratings.push_back({static_cast<std::uint32_t>(r), draw_label(i, r)});
                }
            }
            break;
        }
    }

    return DatasetAssembler::assemble(std::move(item_ids), std::move(rater_ids), spec.domain, std::move(by_item),
                    std::move(batches));
}

} // namespace raterboot

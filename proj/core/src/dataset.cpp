#include "genset/dataset.hpp"

#include "genset/csv.hpp"
#include "genset/errors.hpp"

namespace genset {

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "raw") return DatasetKind::raw;
    if (s == "derived") return DatasetKind::derived;
    throw ValidationError("unknown dataset kind: " + s);
}

TimeSeries ingest_series(const TimeSeries& series, DatasetKind kind,
                         const DeriveOptions& opts) {
    const auto require = [&](const char* name) {
        if (!series.has_channel(name))
            throw ValidationError(std::string("dataset: missing column: ") + name);
    };
    if (kind == DatasetKind::raw) {
        for (const char* name : {"van", "vbn", "vcn", "ia", "ib", "ic"}) require(name);
        return derive_channels(series, opts);
    }
    for (const char* name : {"P", "Q", "V", "f"}) require(name);
    return series;
}

TimeSeries ingest(const std::string& path, DatasetKind kind, const DeriveOptions& opts) {
    return ingest_series(time_series_from_csv(read_csv(path)), kind, opts);
}

} // namespace genset

#pragma once

#include <string>

#include "genset/signal.hpp"
#include "genset/time_series.hpp"

namespace genset {

// Measured-dataset flavors: raw oscilloscope waveforms (t, van, vbn, vcn,
// ia, ib, ic) or already-derived channels (t, P, Q, V, f).
enum class DatasetKind { raw, derived };
DatasetKind dataset_kind_from_string(const std::string& s);

// Loads a dataset from CSV; raw waveforms run through the measurement chain
// so both kinds come back as (P, Q, V, f) channels.
TimeSeries ingest(const std::string& path, DatasetKind kind,
                  const DeriveOptions& opts = {});

// Same conversion for an in-memory series (used for round-trips and tests).
TimeSeries ingest_series(const TimeSeries& series, DatasetKind kind,
                         const DeriveOptions& opts = {});

} // namespace genset

// Python bindings for the ferlink core: channel evaluation, TDL sampling,
// FER measurement, feature extraction and model inference.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "ferlink/channel.hpp"
#include "ferlink/dataset.hpp"
#include "ferlink/gscm.hpp"
#include "ferlink/mlp.hpp"
#include "ferlink/phy.hpp"
#include "ferlink/tdl.hpp"

namespace py = pybind11;
using namespace ferlink;

namespace {

py::array_t<std::complex<double>> grid_to_array(const CtfGrid& grid) {
    const auto rows = static_cast<py::ssize_t>(grid.num_rows);
    const auto cols = static_cast<py::ssize_t>(grid.spec.num_subcarriers);
    py::array_t<std::complex<double>> out({rows, cols});
    std::memcpy(out.mutable_data(), grid.values.data(),
                grid.values.size() * sizeof(cplx));
    return out;
}

py::array_t<float> features_to_array(const std::vector<float>& block, const CtfGrid& grid) {
    const auto rows = static_cast<py::ssize_t>(grid.num_rows);
    const auto cols = static_cast<py::ssize_t>(grid.spec.num_subcarriers);
    py::array_t<float> out({py::ssize_t{2}, rows, cols});
    std::memcpy(out.mutable_data(), block.data(), block.size() * sizeof(float));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Vehicular channel simulation, FER labeling and MLP inference";

    m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;

    py::enum_<PathKind>(m, "PathKind")
        .value("LOS", PathKind::Los)
        .value("STATIC_DISCRETE", PathKind::StaticDiscrete)
        .value("MOBILE_DISCRETE", PathKind::MobileDiscrete)
        .value("DIFFUSE", PathKind::Diffuse);

    py::class_<PropagationPath>(m, "PropagationPath")
        .def(py::init<>())
        .def(py::init([](double amplitude, double phase, double delay, double velocity,
                         PathKind kind) {
                 PropagationPath p;
                 p.amplitude = amplitude;
                 p.phase = phase;
                 p.delay_at_origin = delay;
                 p.relative_velocity = velocity;
                 p.kind = kind;
                 return p;
             }),
             py::arg("amplitude"), py::arg("phase"), py::arg("delay_at_origin"),
             py::arg("relative_velocity"), py::arg("kind") = PathKind::Diffuse)
        .def_readwrite("amplitude", &PropagationPath::amplitude)
        .def_readwrite("phase", &PropagationPath::phase)
        .def_readwrite("delay_at_origin", &PropagationPath::delay_at_origin)
        .def_readwrite("relative_velocity", &PropagationPath::relative_velocity)
        .def_readwrite("kind", &PropagationPath::kind)
        .def("validate", &PropagationPath::validate, py::arg("v_max") = 22.0);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("carrier_frequency", &GridSpec::carrier_frequency)
        .def_readwrite("subcarrier_spacing", &GridSpec::subcarrier_spacing)
        .def_readwrite("num_subcarriers", &GridSpec::num_subcarriers)
        .def_readwrite("snapshot_period", &GridSpec::snapshot_period)
        .def_readwrite("num_snapshots", &GridSpec::num_snapshots)
        .def_readwrite("stationarity_time", &GridSpec::stationarity_time)
        .def("bin_k", &GridSpec::bin_k)
        .def("bin_offset", &GridSpec::bin_offset)
        .def("bin_offsets", &GridSpec::bin_offsets)
        .def("validate", &GridSpec::validate);

    py::class_<StationaryProcess>(m, "StationaryProcess")
        .def(py::init<>())
        .def_readwrite("paths", &StationaryProcess::paths)
        .def_readwrite("spec", &StationaryProcess::spec)
        .def_readwrite("delay_drift", &StationaryProcess::delay_drift)
        .def("validate", &StationaryProcess::validate);

    m.def("doppler_shift", &doppler_shift, py::arg("relative_velocity"),
          py::arg("carrier_frequency"), "Constant Doppler shift f = f_C * v / c0.");
    m.def("max_extension_time", &max_extension_time, py::arg("process"));

    m.def(
        "evaluate_ctf",
        [](const StationaryProcess& process, std::int64_t m_start, std::int64_t m_end) {
            return grid_to_array(evaluate_ctf(process, m_start, m_end));
        },
        py::arg("process"), py::arg("m_start"), py::arg("m_end"),
        "Time-variant frequency response over snapshots [m_start, m_end) as a "
        "complex (rows x num_subcarriers) array.");

    m.def(
        "evaluate_ctf_at",
        [](const StationaryProcess& process, double t, const std::vector<double>& offsets) {
            auto values = evaluate_ctf_at(process, t, offsets);
            py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(values.size()));
            std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(cplx));
            return out;
        },
        py::arg("process"), py::arg("t"), py::arg("frequency_offsets"));

    py::class_<TdlConfig>(m, "TdlConfig")
        .def(py::init<>())
        .def_readwrite("num_taps", &TdlConfig::num_taps)
        .def_readwrite("tap_spacing", &TdlConfig::tap_spacing)
        .def_readwrite("pdp_decay", &TdlConfig::pdp_decay)
        .def_readwrite("paths_per_tap", &TdlConfig::paths_per_tap)
        .def_readwrite("rician_k_db", &TdlConfig::rician_k_db)
        .def_readwrite("max_doppler", &TdlConfig::max_doppler)
        .def_readwrite("total_power", &TdlConfig::total_power)
        .def("tap_powers", &TdlConfig::tap_powers)
        .def("validate", &TdlConfig::validate);

    m.def("sample_tdl_process", &sample_tdl_process, py::arg("config"), py::arg("spec"),
          py::arg("seed"), "Draw one tapped-delay-line stationarity region.");

    py::class_<CanyonScenario>(m, "CanyonScenario")
        .def(py::init<>())
        .def_readwrite("canyon_length", &CanyonScenario::canyon_length)
        .def_readwrite("canyon_width", &CanyonScenario::canyon_width)
        .def_readwrite("tx_speed", &CanyonScenario::tx_speed)
        .def_readwrite("num_rx", &CanyonScenario::num_rx)
        .def_readwrite("rx_spacing", &CanyonScenario::rx_spacing)
        .def_readwrite("diffuse_density", &CanyonScenario::diffuse_density)
        .def_readwrite("num_static_discrete", &CanyonScenario::num_static_discrete)
        .def_readwrite("num_mobile_discrete", &CanyonScenario::num_mobile_discrete)
        .def_readwrite("los_blockage_probability", &CanyonScenario::los_blockage_probability)
        .def("validate", &CanyonScenario::validate)
        .def("trajectory_length", &CanyonScenario::trajectory_length);

    py::class_<GscmRegion>(m, "GscmRegion")
        .def_readonly("process", &GscmRegion::process)
        .def_readonly("run_index", &GscmRegion::run_index)
        .def_readonly("rx_index", &GscmRegion::rx_index)
        .def_readonly("waypoint_index", &GscmRegion::waypoint_index)
        .def_readonly("seed", &GscmRegion::seed);

    m.def("generate_v2i_run", &generate_v2i_run, py::arg("scenario"), py::arg("spec"),
          py::arg("regions_per_run"), py::arg("seed"), py::arg("run_index") = 0,
          "One street-canyon simulation run of S * regions_per_run regions.");

    py::class_<PhyConfig>(m, "PhyConfig")
        .def(py::init<>())
        .def_readwrite("frame_payload_bytes", &PhyConfig::frame_payload_bytes)
        .def_readwrite("frames_per_region", &PhyConfig::frames_per_region)
        .def_readwrite("frame_rate", &PhyConfig::frame_rate)
        .def_readwrite("tx_power_dbm", &PhyConfig::tx_power_dbm)
        .def_readwrite("noise_floor_dbm", &PhyConfig::noise_floor_dbm)
        .def_readwrite("noise_enabled", &PhyConfig::noise_enabled)
        .def("symbol_duration", &PhyConfig::symbol_duration)
        .def("frame_duration", &PhyConfig::frame_duration)
        .def("num_data_symbols", &PhyConfig::num_data_symbols)
        .def("unit_gain_snr_db", &PhyConfig::unit_gain_snr_db)
        .def("validate", &PhyConfig::validate);

    py::class_<FerMeasurement>(m, "FerMeasurement")
        .def_readonly("frames_sent", &FerMeasurement::frames_sent)
        .def_readonly("frames_failed", &FerMeasurement::frames_failed)
        .def_readonly("fer", &FerMeasurement::fer)
        .def_readonly("region_id", &FerMeasurement::region_id);

    m.def(
        "measure_fer",
        [](const StationaryProcess& process, const PhyConfig& cfg, std::uint64_t seed,
           const std::string& region_id) {
            py::gil_scoped_release release;
            return measure_fer(process, cfg, seed, region_id);
        },
        py::arg("process"), py::arg("config"), py::arg("seed"), py::arg("region_id") = "",
        "802.11p link-level frame error rate of one stationarity region.");

    py::class_<FerClassScheme>(m, "FerClassScheme")
        .def(py::init<>())
        .def(py::init([](std::array<double, 3> boundaries) {
                 FerClassScheme s;
                 s.boundaries = boundaries;
                 return s;
             }),
             py::arg("boundaries"))
        .def_readwrite("boundaries", &FerClassScheme::boundaries)
        .def("classify", &FerClassScheme::classify)
        .def("validate", &FerClassScheme::validate);

    m.def("classify_fer", &classify_fer, py::arg("fer"), py::arg("scheme"));

    m.def(
        "kmeans_boundaries",
        [](const std::vector<double>& fers, int k, std::uint64_t seed, double zero_clamp,
           int restarts) { return kmeans_boundaries(fers, k, seed, zero_clamp, restarts); },
        py::arg("fers"), py::arg("k") = 4, py::arg("seed") = 1,
        py::arg("zero_clamp") = 2.5e-5, py::arg("restarts") = 50,
        "Class boundaries from 1-D k-means on log10 FER.");

    m.def(
        "extract_features",
        [](const StationaryProcess& process) {
            auto grid = evaluate_ctf(process, 0, process.spec.num_snapshots);
            auto center = resample_ctf(grid);
            return features_to_array(to_feature_block(center), center);
        },
        py::arg("process"),
        "Feature block (2 x snapshots x 41) of the region's center bins: real "
        "and imaginary planes as float32.");

    py::class_<Mlp>(m, "Mlp")
        .def_property_readonly("num_parameters", &Mlp::num_parameters)
        .def_property_readonly("input_dim", &Mlp::input_dim)
        .def_property_readonly("output_dim", &Mlp::output_dim)
        .def_property_readonly("num_layers", &Mlp::num_layers)
        .def(
            "predict",
            [](const Mlp& model, py::array_t<float, py::array::c_style | py::array::forcecast>
                                     features) {
                auto buf = features.request();
                const auto dim = static_cast<py::ssize_t>(model.input_dim());
                const bool batched = buf.ndim == 2;
                if ((buf.ndim != 1 && buf.ndim != 2) || buf.shape[buf.ndim - 1] != dim)
                    throw std::invalid_argument("feature array must be (n, " +
                                                std::to_string(dim) + ") or flat");
                const py::ssize_t n = batched ? buf.shape[0] : 1;
                py::array_t<int> out(n);
                const auto* src = static_cast<const float*>(buf.ptr);
                for (py::ssize_t i = 0; i < n; ++i) {
                    Eigen::VectorXf x =
                        Eigen::Map<const Eigen::VectorXf>(src + i * dim, dim);
                    out.mutable_at(i) = predict_class(model, x);
                }
                if (!batched) return py::object(py::int_(out.at(0)));
                return py::object(std::move(out));
            },
            py::arg("features"),
            "Predicted FER class (1..4) for one flat feature vector or a batch.");

    m.def("load_model", &load_model, py::arg("path"), "Load a FERM checkpoint.");
    m.def("default_layer_dims", &default_layer_dims);
}

//! Python bindings for the `placesim` core crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use placesim::feasibility::{self, FeasibilityOptions};
use placesim::sim::scenario::load_scenario;
use placesim::{kinematics, latency, queue_mc, sim};

fn value_err(e: placesim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyfunction]
fn total_response_latency(network: f64, inference: f64, control: f64) -> PyResult<f64> {
    latency::total_response_latency(network, inference, control).map_err(value_err)
}

#[pyfunction]
fn amortized_latency(service_time: f64, frame_rate: f64) -> PyResult<f64> {
    latency::amortized_latency(service_time, frame_rate).map_err(value_err)
}

#[pyfunction]
fn cloud_break_even(device_latency: f64, cloud_latency: f64, frame_rate: f64) -> PyResult<f64> {
    latency::cloud_break_even(device_latency, cloud_latency, frame_rate).map_err(value_err)
}

/// Returns `(prefer_cloud, break_even_or_None)`.
#[pyfunction]
fn prefer_cloud(rtt: f64, device_latency: f64, cloud_latency: f64, frame_rate: f64) -> PyResult<(bool, Option<f64>)> {
    let p = latency::prefer_cloud(rtt, device_latency, cloud_latency, frame_rate).map_err(value_err)?;
    Ok((p.prefer_cloud, p.break_even))
}

#[pyfunction]
fn mph_to_mps(mph: f64) -> f64 {
    kinematics::mph_to_mps(mph)
}

#[pyfunction]
fn braking_distance(speed: f64, deceleration: f64) -> PyResult<f64> {
    kinematics::braking_distance(speed, deceleration).map_err(value_err)
}

#[pyfunction]
fn stopping_distance(speed: f64, deceleration: f64, delay: f64) -> PyResult<f64> {
    kinematics::stopping_distance(speed, deceleration, delay).map_err(value_err)
}

#[pyfunction]
fn reaction_budget(speed: f64, deceleration: f64, available_distance: f64) -> PyResult<f64> {
    let sc = kinematics::BrakingScenario::new(speed, deceleration, available_distance).map_err(value_err)?;
    Ok(kinematics::reaction_budget(&sc))
}

#[pyfunction]
#[pyo3(signature = (arrival_rate, mean_service, customers = 1_000_000, seed = 0))]
fn simulate_mm1<'py>(
    py: Python<'py>,
    arrival_rate: f64,
    mean_service: f64,
    customers: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = queue_mc::simulate_mm1(arrival_rate, mean_service, customers, seed).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("customers_served", s.customers_served)?;
    d.set_item("customers_measured", s.customers_measured)?;
    d.set_item("mean_sojourn", s.mean_sojourn)?;
    d.set_item("mean_wait", s.mean_wait)?;
    d.set_item("mean_in_system", s.mean_in_system)?;
    d.set_item("utilization_observed", s.utilization_observed)?;
    d.set_item("seed", s.seed)?;
    d.set_item("diverged", s.diverged)?;
    Ok(d)
}

/// Runs a scenario file and returns the summary as a dict.
#[pyfunction]
#[pyo3(signature = (scenario_path, seed = None))]
fn simulate<'py>(py: Python<'py>, scenario_path: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let mut loaded = load_scenario(scenario_path).map_err(value_err)?;
    if let Some(seed) = seed {
        loaded.spec.seed = seed;
    }
    let cfg = loaded.spec.resolve(&loaded.catalog).map_err(value_err)?;
    let r = sim::run(&cfg).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("outcome", r.outcome.to_string())?;
    d.set_item("t_obs", r.t_obs)?;
    d.set_item("t_det", r.t_det)?;
    d.set_item("t_brake", r.t_brake)?;
    d.set_item("t_stop", r.t_stop)?;
    d.set_item("d_capture", r.d_capture)?;
    d.set_item("d_brake", r.d_brake)?;
    d.set_item("d_stop", r.d_stop)?;
    d.set_item("detection_delay", r.detection_delay)?;
    d.set_item("margin", r.margin)?;
    d.set_item("energy", r.total_inference_energy)?;
    d.set_item("dispatched_frames", r.dispatched_frames)?;
    d.set_item("events", r.events.len())?;
    Ok(d)
}

#[pyclass(name = "LatencySampler", module = "placesim_py", frozen)]
struct PyLatencySampler {
    inner: placesim::LatencySampler,
}

#[pymethods]
impl PyLatencySampler {
    #[staticmethod]
    fn fixed(value: f64) -> PyResult<Self> {
        placesim::LatencySampler::fixed(value)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (p10, p50, p90, mode = "p50"))]
    fn percentile_table(p10: f64, p50: f64, p90: f64, mode: &str) -> PyResult<Self> {
        let mode = mode.parse().map_err(value_err)?;
        placesim::LatencySampler::percentile_table(p10, p50, p90, mode)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn empirical(samples: Vec<f64>) -> PyResult<Self> {
        placesim::LatencySampler::empirical(samples)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn shifted_lognormal(location: f64, log_mean: f64, log_sigma: f64) -> PyResult<Self> {
        placesim::LatencySampler::shifted_lognormal(location, log_mean, log_sigma)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    fn percentile(&self, q: f64) -> PyResult<f64> {
        self.inner.percentile(q).map_err(value_err)
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.inner.sample(&mut rng)).collect()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn __repr__(&self) -> String {
        format!("LatencySampler({})", self.inner.kind_name())
    }
}

#[pyclass(name = "Catalog", module = "placesim_py", frozen)]
struct PyCatalog {
    inner: placesim::Catalog,
}

#[pymethods]
impl PyCatalog {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        placesim::catalog::load_catalog(path)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn frame_rate(&self) -> f64 {
        self.inner.sensing.frame_rate
    }

    #[getter]
    fn deadline(&self) -> f64 {
        self.inner.sensing.deadline
    }

    /// `(model, platform)` pairs in catalog order.
    fn pairs(&self) -> Vec<(String, String)> {
        self.inner
            .profiles
            .iter()
            .map(|p| (p.model_id.clone(), p.platform_id.clone()))
            .collect()
    }

    /// Feasibility table plus the selection per platform kind.
    #[pyo3(signature = (percentile = 0.5, rtt = None, amortized = false))]
    fn place<'py>(
        &self,
        py: Python<'py>,
        percentile: f64,
        rtt: Option<f64>,
        amortized: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cat = &self.inner;
        let point = match rtt {
            Some(r) => feasibility::uniform_network_point(cat, r),
            None => feasibility::network_point_at(cat, percentile).map_err(value_err)?,
        };
        let report = feasibility::feasibility_set(cat, &cat.sensing, &point, FeasibilityOptions { amortized })
            .map_err(value_err)?;

        let rows = PyList::empty(py);
        for e in &report.evaluated {
            let row = PyDict::new(py);
            row.set_item("model", &e.model_id)?;
            row.set_item("platform", &e.platform_id)?;
            row.set_item("kind", e.kind.to_string())?;
            row.set_item("network_delay", e.network_delay)?;
            row.set_item("inference_latency", e.inference_latency)?;
            row.set_item("total_latency", e.total_latency)?;
            row.set_item("energy", e.energy)?;
            row.set_item("accuracy", e.accuracy)?;
            row.set_item("feasible", e.feasible)?;
            row.set_item("reject_reason", e.reject_reason.map(|r| r.to_string()))?;
            rows.append(row)?;
        }
        let selected = PyDict::new(py);
        for (kind, sel) in report.select_per_kind() {
            selected.set_item(kind.to_string(), sel.map(|s| (s.model_id, s.platform_id)))?;
        }
        let overall = feasibility::select_optimal(report).selected;
        selected.set_item("overall", overall.map(|s| (s.model_id, s.platform_id)))?;

        let out = PyDict::new(py);
        out.set_item("evaluated", rows)?;
        out.set_item("selected", selected)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Catalog({} platforms, {} profiles)",
            self.inner.platforms.len(),
            self.inner.profiles.len()
        )
    }
}

#[pymodule]
fn placesim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(total_response_latency, m)?)?;
    m.add_function(wrap_pyfunction!(amortized_latency, m)?)?;
    m.add_function(wrap_pyfunction!(cloud_break_even, m)?)?;
    m.add_function(wrap_pyfunction!(prefer_cloud, m)?)?;
    m.add_function(wrap_pyfunction!(mph_to_mps, m)?)?;
    m.add_function(wrap_pyfunction!(braking_distance, m)?)?;
    m.add_function(wrap_pyfunction!(stopping_distance, m)?)?;
    m.add_function(wrap_pyfunction!(reaction_budget, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_mm1, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<PyLatencySampler>()?;
    m.add_class::<PyCatalog>()?;
    Ok(())
}

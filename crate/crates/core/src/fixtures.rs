//! Reference calibration content, mirroring the bundled calibration file.
//!
//! Only compiled for tests or with the `fixtures` feature; production code
//! loads calibration from a file.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::calibration::{CalibrationData, CalibrationTables, ForceSeries, ThermalCurve};

pub fn reference_data() -> CalibrationData {
    CalibrationData {
        revision: String::from("2025.1"),
        ambient_c: 26.0,
        recovery_factor: 2.0,
        flow_rate_m3_per_h: Some((4.15, 9.30)),
        thermal: vec![
            thermal(
                3.42,
                &[
                    (0.00, 26.0),
                    (0.25, 25.6),
                    (0.50, 25.3),
                    (0.75, 24.9),
                    (1.00, 24.6),
                    (1.25, 24.3),
                    (1.50, 24.1),
                    (1.75, 23.8),
                    (2.00, 23.6),
                    (2.25, 23.4),
                    (2.50, 23.2),
                    (2.75, 23.0),
                    (3.00, 22.8),
                    (3.25, 22.7),
                    (3.50, 22.5),
                    (3.75, 22.4),
                    (4.00, 22.3),
                    (4.25, 22.1),
                    (4.50, 22.0),
                    (4.75, 21.9),
                    (5.00, 21.8),
                ],
            ),
            thermal(
                4.11,
                &[
                    (0.00, 26.0),
                    (0.25, 25.4),
                    (0.50, 24.8),
                    (0.75, 24.3),
                    (1.00, 23.8),
                    (1.25, 23.4),
                    (1.50, 23.0),
                    (1.75, 22.7),
                    (2.00, 22.3),
                    (2.25, 22.0),
                    (2.50, 21.7),
                    (2.75, 21.5),
                    (3.00, 21.3),
                    (3.25, 21.1),
                    (3.50, 20.9),
                    (3.75, 20.7),
                    (4.00, 20.5),
                    (4.25, 20.4),
                    (4.50, 20.2),
                    (4.75, 20.1),
                    (5.00, 20.0),
                ],
            ),
            thermal(
                4.78,
                &[
                    (0.00, 26.0),
                    (0.25, 25.0),
                    (0.50, 24.2),
                    (0.75, 23.4),
                    (1.00, 22.7),
                    (1.25, 22.1),
                    (1.50, 21.6),
                    (1.75, 21.1),
                    (2.00, 20.6),
                    (2.25, 20.2),
                    (2.50, 19.9),
                    (2.75, 19.6),
                    (3.00, 19.3),
                    (3.25, 19.1),
                    (3.50, 18.8),
                    (3.75, 18.6),
                    (4.00, 18.5),
                    (4.25, 18.3),
                    (4.50, 18.2),
                    (4.75, 18.0),
                    (5.00, 17.9),
                ],
            ),
            thermal(
                5.44,
                &[
                    (0.00, 26.0),
                    (0.25, 23.5),
                    (0.50, 21.6),
                    (0.75, 20.1),
                    (1.00, 18.9),
                    (1.25, 18.0),
                    (1.50, 17.3),
                    (1.75, 16.7),
                    (2.00, 16.3),
                    (2.25, 16.0),
                    (2.50, 15.7),
                    (2.75, 15.5),
                    (3.00, 15.4),
                    (3.25, 15.2),
                    (3.50, 15.1),
                    (3.75, 15.1),
                    (4.00, 15.0),
                    (4.25, 15.0),
                    (4.50, 14.9),
                    (4.75, 14.9),
                    (5.00, 14.9),
                ],
            ),
            thermal(
                6.00,
                &[
                    (0.00, 26.0),
                    (0.25, 22.1),
                    (0.50, 19.4),
                    (0.75, 17.5),
                    (1.00, 16.2),
                    (1.25, 15.2),
                    (1.50, 14.6),
                    (1.75, 14.1),
                    (2.00, 13.8),
                    (2.25, 13.6),
                    (2.50, 13.4),
                    (2.75, 13.3),
                    (3.00, 13.2),
                    (3.25, 13.2),
                    (3.50, 13.1),
                    (3.75, 13.1),
                    (4.00, 13.1),
                    (4.25, 13.1),
                    (4.50, 13.1),
                    (4.75, 13.1),
                    (5.00, 13.1),
                ],
            ),
        ],
        force: vec![
            ForceSeries {
                source_psi: 5.0,
                samples: ms_series(&[
                    0.0, 0.3, 0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 2.9, 3.2, 3.5, 3.7, 3.8,
                ]),
                plateau_verified: false,
            },
            ForceSeries {
                source_psi: 10.0,
                samples: ms_series(&[
                    0.0, 0.6, 1.3, 2.1, 2.9, 3.8, 4.7, 5.6, 6.5, 7.3, 8.0, 8.0, 8.0,
                ]),
                plateau_verified: true,
            },
        ],
        vibration: vec![
            (1.0, 1.2),
            (10.0, 1.2),
            (80.0, 1.7),
            (150.0, 1.1),
            (200.0, 0.6),
        ],
        exhaust_decay_ms: (30.0, 50.0),
    }
}

pub fn reference_tables() -> CalibrationTables {
    CalibrationTables::new(reference_data()).expect("reference calibration is valid")
}

fn thermal(supply_bar: f64, samples: &[(f64, f64)]) -> ThermalCurve {
    ThermalCurve {
        supply_bar,
        samples: samples.to_vec(),
    }
}

/// Forces sampled every 20 ms from 0 ms.
fn ms_series(forces: &[f64]) -> Vec<(f64, f64)> {
    forces
        .iter()
        .enumerate()
        .map(|(i, &f)| (20.0 * i as f64, f))
        .collect()
}

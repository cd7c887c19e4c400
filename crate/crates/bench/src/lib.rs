// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for the detector, mixture likelihood ratio and
//! profile fitting; see `benches/detector.rs`.

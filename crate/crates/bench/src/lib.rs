// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for `expratio`; see `benches/`.

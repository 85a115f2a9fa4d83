/*
Copyright 2026 The segman-rs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! Shared test support: an exact-geometry flood-fill oracle for path
//! queries, an exhaustive minimal-subset oracle, a finite-difference
//! Jacobian check and scene generators.

pub mod alg1;
mod jacobians;
pub mod oracle;
pub mod scenes;

pub use alg1::{alg1_oracle, compare_with_selector, Outcome, Probe};
pub use jacobians::{jacobian_error, jacobian_report, residual_cases};
pub use oracle::{feasible_subsets, flood_fill_feasible, min_subsets, oracle_free, GRID_STEP};
pub use scenes::*;

//! Virtual Reality Sickness Questionnaire scoring.
//!
//! Nine items rated 0 (none) to 3 (severe). The first four form the
//! oculomotor component, the remaining five the disorientation component.
//! Each component is its raw sum as a percentage of the maximum; the total is
//! their mean.

use core::fmt;

pub const N_ITEMS: usize = 9;
pub const N_OCULOMOTOR: usize = 4;
pub const MAX_ITEM: u8 = 3;

/// Item order used by every VRSQ file and array in this crate.
pub const ITEM_NAMES: [&str; N_ITEMS] = [
    "general_discomfort",
    "fatigue",
    "eyestrain",
    "difficulty_focusing",
    "headache",
    "fullness_of_head",
    "blurred_vision",
    "dizzy_eyes_closed",
    "vertigo",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("VRSQ item `{item}` (#{index}) out of range: {value} not in 0..=3")]
pub struct ItemOutOfRange {
    pub index: usize,
    pub item: &'static str,
    pub value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VrsqResponse {
    items: [u8; N_ITEMS],
}

impl VrsqResponse {
    pub fn new(items: [i64; N_ITEMS]) -> Result<Self, ItemOutOfRange> {
        let mut out = [0u8; N_ITEMS];
        for (i, &v) in items.iter().enumerate() {
            if !(0..=MAX_ITEM as i64).contains(&v) {
                return Err(ItemOutOfRange { index: i, item: ITEM_NAMES[i], value: v });
            }
            out[i] = v as u8;
        }
        Ok(VrsqResponse { items: out })
    }

    pub fn items(&self) -> [u8; N_ITEMS] {
        self.items
    }

    pub fn oculomotor_sum(&self) -> u32 {
        self.items[..N_OCULOMOTOR].iter().map(|&v| v as u32).sum()
    }

    pub fn disorientation_sum(&self) -> u32 {
        self.items[N_OCULOMOTOR..].iter().map(|&v| v as u32).sum()
    }

    pub fn score(&self) -> VrsqScore {
        VrsqScore::from_sums(self.oculomotor_sum(), self.disorientation_sum())
    }

    /// Response whose component sums are `oculomotor` and `disorientation`,
    /// spread as evenly as possible across the items (earlier items first).
    pub fn from_sums(oculomotor: u32, disorientation: u32) -> Self {
        let mut items = [0u8; N_ITEMS];
        spread(&mut items[..N_OCULOMOTOR], oculomotor);
        spread(&mut items[N_OCULOMOTOR..], disorientation);
        VrsqResponse { items }
    }

    /// Response whose total score is closest to `target` (0–100). Ties go to
    /// the smaller disorientation sum.
    pub fn closest_to_total(target: f64) -> Self {
        let max_o = (N_OCULOMOTOR as u32) * MAX_ITEM as u32;
        let max_d = ((N_ITEMS - N_OCULOMOTOR) as u32) * MAX_ITEM as u32;
        let mut best = (f64::INFINITY, 0, 0);
        for d in 0..=max_d {
            for o in 0..=max_o {
                let err = (VrsqScore::from_sums(o, d).total - target).abs();
                if err < best.0 - 1e-12 {
                    best = (err, o, d);
                }
            }
        }
        VrsqResponse::from_sums(best.1, best.2)
    }
}

fn spread(items: &mut [u8], mut sum: u32) {
    let n = items.len() as u32;
    sum = sum.min(n * MAX_ITEM as u32);
    for (i, slot) in items.iter_mut().enumerate() {
        let remaining = n - i as u32;
        let share = sum.div_ceil(remaining).min(MAX_ITEM as u32);
        *slot = share as u8;
        sum -= share;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VrsqScore {
    pub oculomotor: f64,
    pub disorientation: f64,
    pub total: f64,
}

impl VrsqScore {
    fn from_sums(oculomotor: u32, disorientation: u32) -> Self {
        let max_o = (N_OCULOMOTOR as f64) * MAX_ITEM as f64;
        let max_d = ((N_ITEMS - N_OCULOMOTOR) as f64) * MAX_ITEM as f64;
        let oculomotor = 100.0 * oculomotor as f64 / max_o;
        let disorientation = 100.0 * disorientation as f64 / max_d;
        VrsqScore { oculomotor, disorientation, total: (oculomotor + disorientation) / 2.0 }
    }
}

impl fmt::Display for VrsqScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2},{:.2},{:.2}", self.oculomotor, self.disorientation, self.total)
    }
}

pub fn score(response: &VrsqResponse) -> VrsqScore {
    response.score()
}

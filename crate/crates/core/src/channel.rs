//! Rayleigh channels, downlink feedback and the synchronous uplink.

use rand::Rng;

use crate::error::{check_len, Result};
use crate::rng::{complex_normal_matrix, complex_normal_vector};
use crate::{CMatrix, CVector};

/// One user's block-constant channels to the BS and to the eavesdropper.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannels {
    /// User to BS, length `M`.
    pub h: CVector,
    /// User to eavesdropper, length `E`.
    pub g: CVector,
}

impl UserChannels {
    /// i.i.d. CN(0, 1) entries.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, bs_antennas: usize, eve_antennas: usize) -> Self {
        let h = complex_normal_vector(rng, bs_antennas, 1.0);
        let g = complex_normal_vector(rng, eve_antennas, 1.0);
        Self { h, g }
    }
}

/// `y = h^T V + o`, `o ~ CN(0, sigma_u2 I_L)`. Returned as a length-`L` vector.
pub fn feedback_observation<R: Rng + ?Sized>(
    h: &CVector,
    downlink: &CMatrix,
    sigma_u2: f64,
    rng: &mut R,
) -> Result<CVector> {
    check_len("feedback_observation: h vs V rows", downlink.nrows(), h.len())?;
    let clean = downlink.transpose() * h;
    let noise = complex_normal_vector(rng, downlink.ncols(), sigma_u2);
    Ok(clean + noise)
}

/// `H X + Z` for a given noise realization.
pub fn uplink_with_noise(x: &CMatrix, h: &CMatrix, noise: &CMatrix) -> Result<CMatrix> {
    check_len("uplink: H columns vs X rows", x.nrows(), h.ncols())?;
    check_len("uplink: noise rows", h.nrows(), noise.nrows())?;
    check_len("uplink: noise columns", x.ncols(), noise.ncols())?;
    Ok(h * x + noise)
}

/// `H X + Z` with `Z` i.i.d. CN(0, sigma2). `X` is `Ka x n`, `H` is `M x Ka`.
pub fn uplink<R: Rng + ?Sized>(x: &CMatrix, h: &CMatrix, sigma2: f64, rng: &mut R) -> Result<CMatrix> {
    check_len("uplink: H columns vs X rows", x.nrows(), h.ncols())?;
    let noise = complex_normal_matrix(rng, h.nrows(), x.ncols(), sigma2);
    uplink_with_noise(x, h, &noise)
}

/// Segment lengths of one uplink frame: pilot, polar, key parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentLayout {
    pub pilot: usize,
    pub polar: usize,
    pub key: usize,
}

impl SegmentLayout {
    pub fn total(&self) -> usize {
        self.pilot + self.polar + self.key
    }
}

/// One receiver's observation split as `[Y_p, Y_d, Y_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub pilot: CMatrix,
    pub polar: CMatrix,
    pub key: CMatrix,
}

impl ReceivedFrame {
    pub fn split(y: &CMatrix, layout: SegmentLayout) -> Result<Self> {
        check_len("ReceivedFrame::split columns", layout.total(), y.ncols())?;
        let rows = y.nrows();
        Ok(Self {
            pilot: y.view((0, 0), (rows, layout.pilot)).into_owned(),
            polar: y.view((0, layout.pilot), (rows, layout.polar)).into_owned(),
            key: y
                .view((0, layout.pilot + layout.polar), (rows, layout.key))
                .into_owned(),
        })
    }

    /// `Y_pp = [Y_p, Y_d]`.
    pub fn pilot_polar(&self) -> CMatrix {
        let rows = self.pilot.nrows();
        let mut out = CMatrix::zeros(rows, self.pilot.ncols() + self.polar.ncols());
        out.columns_mut(0, self.pilot.ncols()).copy_from(&self.pilot);
        out.columns_mut(self.pilot.ncols(), self.polar.ncols())
            .copy_from(&self.polar);
        out
    }

    pub fn antennas(&self) -> usize {
        self.pilot.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::C64;

    #[test]
    fn noiseless_unit_channel_reads_row_of_downlink() {
        let mut rng = StreamKey::public(1, "ch").rng();
        let v = complex_normal_matrix(&mut rng, 3, 6, 1.0);
        let mut h = CVector::zeros(3);
        h[0] = C64::new(1.0, 0.0);
        let y = feedback_observation(&h, &v, 0.0, &mut rng).unwrap();
        for l in 0..6 {
            assert_eq!(y[l], v[(0, l)]);
        }
    }

    #[test]
    fn zero_channel_gives_pure_noise() {
        let mut rng = StreamKey::public(2, "ch").rng();
        let v = complex_normal_matrix(&mut rng, 2, 20_000, 1.0);
        let y = feedback_observation(&CVector::zeros(2), &v, 1.0, &mut rng).unwrap();
        let var = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((var - 1.0).abs() < 4.0 / (y.len() as f64).sqrt());
    }

    #[test]
    fn feedback_is_reproducible() {
        let v = complex_normal_matrix(&mut StreamKey::public(3, "v").rng(), 4, 8, 1.0);
        let h = complex_normal_vector(&mut StreamKey::public(3, "h").rng(), 4, 1.0);
        let a = feedback_observation(&h, &v, 1.0, &mut StreamKey::public(3, "o").rng()).unwrap();
        let b = feedback_observation(&h, &v, 1.0, &mut StreamKey::public(3, "o").rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_user_noiseless_uplink_is_rank_one() {
        let mut rng = StreamKey::public(4, "ul").rng();
        let x = complex_normal_matrix(&mut rng, 1, 10, 1.0);
        let h = complex_normal_matrix(&mut rng, 5, 1, 1.0);
        let y = uplink(&x, &h, 0.0, &mut rng).unwrap();
        assert_eq!(y, &h * &x);
    }

    #[test]
    fn noise_only_frame_has_configured_variance() {
        let mut rng = StreamKey::public(5, "ul").rng();
        let x = CMatrix::zeros(3, 5000);
        let h = complex_normal_matrix(&mut rng, 4, 3, 1.0);
        let sigma2 = 0.7;
        let y = uplink(&x, &h, sigma2, &mut rng).unwrap();
        let n = y.len() as f64;
        let var = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        // |z|^2 is exponential with mean sigma2: stderr sigma2 / sqrt(n)
        assert!((var - sigma2).abs() < 3.0 * sigma2 / n.sqrt());
    }

    #[test]
    fn uplink_is_linear_for_fixed_noise() {
        let mut rng = StreamKey::public(6, "ul").rng();
        let x = complex_normal_matrix(&mut rng, 2, 12, 1.0);
        let h = complex_normal_matrix(&mut rng, 3, 2, 1.0);
        let z = complex_normal_matrix(&mut rng, 3, 12, 0.5);
        let both = uplink_with_noise(&x, &h, &z).unwrap();
        let first = uplink_with_noise(&x.rows(0, 1).into_owned(), &h.columns(0, 1).into_owned(), &z).unwrap();
        let second = uplink_with_noise(
            &x.rows(1, 1).into_owned(),
            &h.columns(1, 1).into_owned(),
            &CMatrix::zeros(3, 12),
        )
        .unwrap();
        assert!((both - first - second).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut rng = StreamKey::public(7, "ul").rng();
        let x = CMatrix::zeros(2, 4);
        let h = CMatrix::zeros(3, 3);
        assert!(uplink(&x, &h, 1.0, &mut rng).is_err());
        assert!(feedback_observation(&CVector::zeros(2), &CMatrix::zeros(3, 4), 1.0, &mut rng).is_err());
    }

    #[test]
    fn split_preserves_segment_order() {
        let y = CMatrix::from_fn(2, 7, |r, c| C64::new(c as f64, r as f64));
        let f = ReceivedFrame::split(&y, SegmentLayout { pilot: 2, polar: 3, key: 2 }).unwrap();
        assert_eq!(f.pilot.ncols(), 2);
        assert_eq!(f.polar.ncols(), 3);
        assert_eq!(f.key.ncols(), 2);
        assert_eq!(f.polar[(1, 0)], C64::new(2.0, 1.0));
        assert_eq!(f.key[(0, 1)], C64::new(6.0, 0.0));
        assert_eq!(f.pilot_polar(), y.columns(0, 5).into_owned());
    }
}

use crate::error::{Error, Result};

/// Dense `height × width × channels` volume of per-pixel scores.
///
/// Storage is channel-planar: all of channel 0 row-major, then channel 1,
/// and so on, so each channel is a contiguous 2D slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVolume {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl ScoreVolume {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::validation(format!(
                "volume dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        let expected = height * width * channels;
        if values.len() != expected {
            return Err(Error::validation(format!(
                "volume {height}x{width}x{channels} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(height, width, channels, vec![0.0; height * width * channels])
    }

    /// Builds a one-hot ground-truth volume from a per-pixel class map
    /// (row-major, `height * width` entries, each `< channels`).
    pub fn one_hot(height: usize, width: usize, channels: usize, classes: &[usize]) -> Result<Self> {
        if classes.len() != height * width {
            return Err(Error::validation(format!(
                "class map has {} entries, expected {}",
                classes.len(),
                height * width
            )));
        }
        let mut vol = Self::zeros(height, width, channels)?;
        for (p, &class) in classes.iter().enumerate() {
            if class >= channels {
                return Err(Error::validation(format!(
                    "class {class} out of range for {channels} channels"
                )));
            }
            vol.values[class * height * width + p] = 1.0;
        }
        Ok(vol)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.height && j < self.width && k < self.channels);
        (k * self.height + i) * self.width + j
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.values[idx] = v;
    }

    /// The `k`-th channel as a row-major `height * width` slice.
    pub fn channel(&self, k: usize) -> &[f64] {
        let plane = self.height * self.width;
        &self.values[k * plane..(k + 1) * plane]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    /// Checks the ground-truth invariant: entries are 0 or 1 with exactly one 1 per pixel.
    pub fn validate_one_hot(&self) -> Result<()> {
        for i in 0..self.height {
            for j in 0..self.width {
                let mut ones = 0;
                for k in 0..self.channels {
                    let v = self.get(i, j, k);
                    if v == 1.0 {
                        ones += 1;
                    } else if v != 0.0 {
                        return Err(Error::validation(format!(
                            "ground truth entry ({i},{j},{k}) = {v} is not 0 or 1"
                        )));
                    }
                }
                if ones != 1 {
                    return Err(Error::validation(format!(
                        "ground truth pixel ({i},{j}) has {ones} hot channels"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks the prediction invariant: every entry lies in `[0, 1]`.
    pub fn validate_probabilities(&self) -> Result<()> {
        match self.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            None => Ok(()),
            Some(idx) => Err(Error::validation(format!(
                "prediction value {} at flat index {idx} outside [0, 1]",
                self.values[idx]
            ))),
        }
    }

    pub(crate) fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "shape mismatch: {}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.channels, other.height, other.width, other.channels
            )))
        }
    }
}

/// Arithmetic mean of a non-empty grid: the entry sum over the element count.
pub fn volume_mean(grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::validation("mean of an empty grid"));
    }
    Ok(grid.iter().sum::<f64>() / grid.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_examples() {
        assert_eq!(volume_mean(&[1.0; 4]).unwrap(), 1.0);
        assert_eq!(volume_mean(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
        assert_eq!(volume_mean(&[-0.01, -0.01]).unwrap(), -0.01);
        assert!(volume_mean(&[]).is_err());
    }

    #[test]
    fn one_hot_layout() {
        let v = ScoreVolume::one_hot(1, 2, 2, &[0, 1]).unwrap();
        assert_eq!(v.channel(0), &[1.0, 0.0]);
        assert_eq!(v.channel(1), &[0.0, 1.0]);
        assert_eq!(v.get(0, 1, 1), 1.0);
        v.validate_one_hot().unwrap();
    }

    #[test]
    fn rejects_bad_volumes() {
        assert!(ScoreVolume::new(0, 1, 1, vec![]).is_err());
        assert!(ScoreVolume::new(1, 1, 2, vec![1.0]).is_err());
        assert!(ScoreVolume::one_hot(1, 1, 2, &[2]).is_err());

        let two_hot = ScoreVolume::new(1, 1, 2, vec![1.0, 1.0]).unwrap();
        assert!(two_hot.validate_one_hot().is_err());
        let fractional = ScoreVolume::new(1, 1, 2, vec![0.5, 0.5]).unwrap();
        assert!(fractional.validate_one_hot().is_err());
        fractional.validate_probabilities().unwrap();
        let out_of_range = ScoreVolume::new(1, 1, 2, vec![1.5, 0.0]).unwrap();
        assert!(out_of_range.validate_probabilities().is_err());
    }
}

//! Pixel to voltage-spike encoding.
//!
//! Every pixel becomes one spike whose height tracks the pixel value. Training
//! drives at pixel/10 mV; inference drives at a tenth of that so reading the
//! drift layer barely disturbs it.

use crate::error::{Error, Result};
use crate::image::{Grid, Image};

/// All spikes share the same hold time of one clock cycle.
pub const HOLD_CYCLES: u32 = 1;

fn check_pixel(p: i32) -> Result<u8> {
    u8::try_from(p).map_err(|_| Error::InvalidArgument(format!("pixel value {p} outside 0..=255")))
}

/// Training-scale spike height in mV.
pub fn pixel_to_training_voltage(p: i32) -> Result<f64> {
    Ok(training_mv(check_pixel(p)?))
}

/// Inference-scale spike height in mV.
pub fn pixel_to_inference_voltage(p: i32) -> Result<f64> {
    Ok(inference_mv(check_pixel(p)?))
}

#[inline]
pub fn training_mv(p: u8) -> f64 {
    f64::from(p) / 10.0
}

#[inline]
pub fn inference_mv(p: u8) -> f64 {
    training_mv(p) / 10.0
}

/// Area of a rectangular spike: amplitude times hold time.
pub fn spike_area(amplitude: f64, hold_cycles: u32) -> Result<f64> {
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spike amplitude must be >= 0, got {amplitude}"
        )));
    }
    if hold_cycles == 0 {
        return Err(Error::InvalidArgument(
            "hold time must be >= 1 cycle".into(),
        ));
    }
    Ok(amplitude * f64::from(hold_cycles))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Training,
    Inference,
}

/// Grid of spike amplitudes (mV) for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeFrame {
    amplitudes: Grid<f64>,
}

impl SpikeFrame {
    pub fn encode(image: &Image, scale: Scale) -> Self {
        let f = match scale {
            Scale::Training => training_mv,
            Scale::Inference => inference_mv,
        };
        Self {
            amplitudes: image.map(f),
        }
    }

    pub fn amplitudes(&self) -> &Grid<f64> {
        &self.amplitudes
    }

    pub fn hold_cycles(&self) -> u32 {
        HOLD_CYCLES
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(pixel_to_training_voltage(25).unwrap(), 2.5);
        assert_eq!(pixel_to_training_voltage(145).unwrap(), 14.5);
        assert_eq!(pixel_to_training_voltage(0).unwrap(), 0.0);
        assert_eq!(pixel_to_training_voltage(255).unwrap(), 25.5);
        assert_eq!(pixel_to_inference_voltage(100).unwrap(), 1.0);
        assert_eq!(pixel_to_inference_voltage(0).unwrap(), 0.0);
        assert_eq!(pixel_to_inference_voltage(255).unwrap(), 2.55);
        assert!(pixel_to_training_voltage(256).is_err());
        assert!(pixel_to_inference_voltage(-1).is_err());
    }

    #[test]
    fn areas() {
        assert_eq!(spike_area(25.5, 1).unwrap(), 25.5);
        assert_eq!(spike_area(0.0, 1).unwrap(), 0.0);
        assert_eq!(spike_area(12.0, 3).unwrap(), 36.0);
        assert!(spike_area(-1.0, 1).is_err());
        assert!(spike_area(1.0, 0).is_err());
    }

    #[test]
    fn inference_is_a_tenth_of_training() {
        for p in 0..=255 {
            let t = pixel_to_training_voltage(p).unwrap();
            let i = pixel_to_inference_voltage(p).unwrap();
            assert_eq!(i, t / 10.0, "pixel {p}");
        }
    }

    #[test]
    fn monotone() {
        for p in 0..255 {
            assert!(training_mv(p + 1) > training_mv(p));
            assert!(inference_mv(p + 1) > inference_mv(p));
        }
    }

    #[test]
    fn frame_encoding() {
        let img = Image::from_pixels(1, 3, vec![0, 100, 255]).unwrap();
        let f = SpikeFrame::encode(&img, Scale::Training);
        assert_eq!(f.amplitudes().as_slice(), &[0.0, 10.0, 25.5]);
        assert_eq!(f.hold_cycles(), 1);
        let f = SpikeFrame::encode(&img, Scale::Inference);
        assert_eq!(f.amplitudes().as_slice(), &[0.0, 1.0, 2.55]);
    }
}

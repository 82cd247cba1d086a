//! Shape propagation and receptive-field arithmetic for plain strided
//! encoder/decoder stacks with valid padding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    TransposedConv,
}

/// One convolution or transposed convolution with valid padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub kernel: usize,
    pub stride: usize,
    pub out_channels: usize,
    /// Extra rows/cols appended by a transposed convolution. Each entry is 0
    /// or 1 and must be smaller than the stride; always zero for `Conv`.
    pub output_padding: (usize, usize),
}

impl LayerSpec {
    pub fn conv(kernel: usize, stride: usize, out_channels: usize) -> Self {
        Self {
            kind: LayerKind::Conv,
            kernel,
            stride,
            out_channels,
            output_padding: (0, 0),
        }
    }

    pub fn transposed(kernel: usize, stride: usize, out_channels: usize) -> Self {
        Self {
            kind: LayerKind::TransposedConv,
            kernel,
            stride,
            out_channels,
            output_padding: (0, 0),
        }
    }

    pub fn with_output_padding(mut self, rows: usize, cols: usize) -> Self {
        self.output_padding = (rows, cols);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.kernel == 0 || self.stride == 0 || self.out_channels == 0 {
            return Err(Error::validation(format!(
                "kernel, stride and channels must be >= 1: {self:?}"
            )));
        }
        let (pr, pc) = self.output_padding;
        match self.kind {
            LayerKind::Conv if (pr, pc) != (0, 0) => Err(Error::validation(
                "output padding only applies to transposed convolutions",
            )),
            LayerKind::TransposedConv
                if pr > 1 || pc > 1 || pr >= self.stride || pc >= self.stride =>
            {
                Err(Error::validation(format!(
                    "output padding {:?} must be 0 or 1 and below stride {}",
                    self.output_padding, self.stride
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl TensorShape {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
        }
    }
}

impl std::fmt::Display for TensorShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

fn conv_dim(input: usize, kernel: usize, stride: usize) -> Option<usize> {
    input.checked_sub(kernel).map(|d| d / stride + 1)
}

fn transposed_dim(input: usize, kernel: usize, stride: usize, pad: usize) -> usize {
    (input - 1) * stride + kernel + pad
}

/// Output shape after each layer, in order.
pub fn propagate_shapes(layers: &[LayerSpec], input: TensorShape) -> Result<Vec<TensorShape>> {
    if layers.is_empty() {
        return Err(Error::validation("layer list is empty"));
    }
    if input.height == 0 || input.width == 0 || input.channels == 0 {
        return Err(Error::validation(format!("input shape {input} has a zero dimension")));
    }
    let mut shapes = Vec::with_capacity(layers.len());
    let mut cur = input;
    for (idx, layer) in layers.iter().enumerate() {
        layer.validate()?;
        let (h, w) = match layer.kind {
            LayerKind::Conv => (
                conv_dim(cur.height, layer.kernel, layer.stride),
                conv_dim(cur.width, layer.kernel, layer.stride),
            ),
            LayerKind::TransposedConv => (
                Some(transposed_dim(cur.height, layer.kernel, layer.stride, layer.output_padding.0)),
                Some(transposed_dim(cur.width, layer.kernel, layer.stride, layer.output_padding.1)),
            ),
        };
        match (h, w) {
            (Some(h), Some(w)) if h >= 1 && w >= 1 => {
                cur = TensorShape::new(h, w, layer.out_channels);
                shapes.push(cur);
            }
            _ => {
                return Err(Error::validation(format!(
                    "layer {idx} (kernel {}) does not fit input {cur}",
                    layer.kernel
                )))
            }
        }
    }
    Ok(shapes)
}

/// Receptive field (in input pixels, per side) of the last layer of a conv stack.
pub fn receptive_field(layers: &[LayerSpec]) -> Result<usize> {
    let mut field = 1usize;
    let mut jump = 1usize;
    for (idx, layer) in layers.iter().enumerate() {
        layer.validate()?;
        if layer.kind != LayerKind::Conv {
            return Err(Error::validation(format!(
                "layer {idx} is a transposed convolution; receptive field needs conv layers"
            )));
        }
        field += (layer.kernel - 1) * jump;
        jump *= layer.stride;
    }
    Ok(field)
}

/// Input shape of the lane segmentation network.
pub const LANE_NET_INPUT: TensorShape = TensorShape {
    height: 360,
    width: 480,
    channels: 3,
};

/// Five 3×3 stride-2 valid convolutions, 32 → 512 channels.
pub fn lane_encoder_layers() -> Vec<LayerSpec> {
    [32, 64, 128, 256, 512]
        .into_iter()
        .map(|c| LayerSpec::conv(3, 2, c))
        .collect()
}

/// Five 3×3 stride-2 transposed convolutions mirroring the encoder, ending in
/// two class channels.
///
/// A stride-2 valid transposed conv can only produce odd sizes, so restoring
/// the even encoder sizes (44 rows, then 360×480) needs one row/column of
/// output padding on those layers.
pub fn lane_decoder_layers() -> Vec<LayerSpec> {
    vec![
        LayerSpec::transposed(3, 2, 256),
        LayerSpec::transposed(3, 2, 128).with_output_padding(1, 0),
        LayerSpec::transposed(3, 2, 64),
        LayerSpec::transposed(3, 2, 32),
        LayerSpec::transposed(3, 2, 2).with_output_padding(1, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn receptive_field_examples() {
        assert_eq!(receptive_field(&lane_encoder_layers()).unwrap(), 63);
        assert_eq!(receptive_field(&[LayerSpec::conv(3, 1, 8)]).unwrap(), 3);
        let two = [LayerSpec::conv(3, 2, 8), LayerSpec::conv(3, 2, 8)];
        assert_eq!(receptive_field(&two).unwrap(), 7);
        assert_eq!(receptive_field(&[]).unwrap(), 1);
        assert!(receptive_field(&[LayerSpec::transposed(3, 2, 8)]).is_err());
    }

    #[test]
    fn pointwise_conv_keeps_spatial_dims() {
        let out = propagate_shapes(&[LayerSpec::conv(1, 1, 7)], TensorShape::new(5, 9, 3)).unwrap();
        assert_eq!(out, vec![TensorShape::new(5, 9, 7)]);
    }

    #[test]
    fn encoder_and_decoder_shapes() {
        let enc = propagate_shapes(&lane_encoder_layers(), LANE_NET_INPUT).unwrap();
        let expect_enc = [(179, 239, 32), (89, 119, 64), (44, 59, 128), (21, 29, 256), (10, 14, 512)];
        for (s, (h, w, c)) in enc.iter().zip(expect_enc) {
            assert_eq!(*s, TensorShape::new(h, w, c));
        }
        let dec = propagate_shapes(&lane_decoder_layers(), enc[4]).unwrap();
        let expect_dec = [(21, 29, 256), (44, 59, 128), (89, 119, 64), (179, 239, 32), (360, 480, 2)];
        for (s, (h, w, c)) in dec.iter().zip(expect_dec) {
            assert_eq!(*s, TensorShape::new(h, w, c));
        }
    }

    #[test]
    fn unpadded_decoder_comes_up_one_short() {
        let out = propagate_shapes(&[LayerSpec::transposed(3, 2, 2)], TensorShape::new(179, 239, 32))
            .unwrap();
        assert_eq!(out[0], TensorShape::new(359, 479, 2));
    }

    #[test]
    fn shape_errors() {
        assert!(propagate_shapes(&[], LANE_NET_INPUT).is_err());
        let too_big = [LayerSpec::conv(5, 1, 4)];
        assert!(propagate_shapes(&too_big, TensorShape::new(4, 8, 1)).is_err());
        let bad_pad = [LayerSpec::transposed(3, 2, 4).with_output_padding(2, 0)];
        assert!(propagate_shapes(&bad_pad, TensorShape::new(4, 4, 1)).is_err());
        let pad_on_stride_one = [LayerSpec::transposed(3, 1, 4).with_output_padding(1, 0)];
        assert!(propagate_shapes(&pad_on_stride_one, TensorShape::new(4, 4, 1)).is_err());
        let zero_stride = [LayerSpec::conv(3, 0, 4)];
        assert!(propagate_shapes(&zero_stride, TensorShape::new(4, 4, 1)).is_err());
    }
}

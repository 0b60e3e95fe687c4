//! Middlebury `calib.txt` reader. Only the disparity range and image size
//! are extracted; camera matrices are ignored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CodecError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibInfo {
    pub ndisp: u32,
    pub width: Option<usize>,
    pub height: Option<usize>,
}

pub fn read_calib(path: impl AsRef<Path>) -> Result<CalibInfo, CodecError> {
    parse_calib(&fs::read_to_string(path)?)
}

pub fn parse_calib(text: &str) -> Result<CalibInfo, CodecError> {
    let mut ndisp = None;
    let mut width = None;
    let mut height = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        let bad = || CodecError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "ndisp" => {
                let n: u32 = value.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                ndisp = Some(n);
            }
            "width" => width = Some(value.parse::<usize>().map_err(|_| bad())?),
            "height" => height = Some(value.parse::<usize>().map_err(|_| bad())?),
            _ => {}
        }
    }
    Ok(CalibInfo {
        ndisp: ndisp.ok_or(CodecError::MissingKey("ndisp"))?,
        width,
        height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ndisp_only() {
        let c = parse_calib("ndisp=70").unwrap();
        assert_eq!(c.ndisp, 70);
        assert_eq!(c.width, None);
    }

    #[test]
    fn full_middlebury_file() {
        let text = "cam0=[3997.684 0 1176.728; 0 3997.684 1011.728; 0 0 1]\n\
                    cam1=[3997.684 0 1307.839; 0 3997.684 1011.728; 0 0 1]\n\
                    doffs=131.111\nbaseline=193.001\nwidth=2960\nheight=2016\n\
                    ndisp=290\nisint=0\nvmin=31\nvmax=257\n";
        let c = parse_calib(text).unwrap();
        assert_eq!(
            c,
            CalibInfo {
                ndisp: 290,
                width: Some(2960),
                height: Some(2016)
            }
        );
        let short = parse_calib("ndisp=290\nwidth=2960\nheight=2016").unwrap();
        assert_eq!(short, c);
    }

    #[test]
    fn missing_ndisp() {
        assert!(matches!(
            parse_calib("width=10\nheight=10\n"),
            Err(CodecError::MissingKey("ndisp"))
        ));
    }

    #[test]
    fn zero_or_garbage_ndisp() {
        assert!(matches!(parse_calib("ndisp=0"), Err(CodecError::InvalidValue { .. })));
        assert!(matches!(parse_calib("ndisp=abc"), Err(CodecError::InvalidValue { .. })));
    }
}

//! Bridge to a denoiser running as a child process.
//!
//! Wire format, one request per process:
//!
//! * stdin: the ASCII header `IDBP1 <height> <width> <sigma>\n` followed by
//!   `height·width` little-endian `f32` values in row-major order;
//! * stdout: exactly `height·width` little-endian `f32` values.
//!
//! The command string is run through `sh -c`.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// Environment variable that may hold the default bridge command.
pub const EXTERNAL_DENOISER_ENV: &str = "IDBP_EXTERNAL_DENOISER";

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalDenoiser {
    command: String,
    timeout: Duration,
}

impl ExternalDenoiser {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    /// Reads the command from [`EXTERNAL_DENOISER_ENV`], if set and non-empty.
    pub fn from_env() -> Option<Self> {
        std::env::var(EXTERNAL_DENOISER_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(Self::new)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn denoise(&self, z: &ImageGrid, sigma: f64) -> Result<ImageGrid> {
        let (h, w) = z.dims();
        let request = encode_request(z, sigma);
        let expected = h * w * 4;

        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::External(format!("failed to spawn `{}`: {e}", self.command)))?;

        let mut stdin = child.stdin.take().expect("stdin is piped");
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let mut stderr = child.stderr.take().expect("stderr is piped");

        // A child that exits early closes its stdin; the broken pipe surfaces
        // below as a short read, so write errors are not fatal here.
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(&request);
        });
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            stdout.read_to_end(&mut buf).map(|_| buf)
        });
        let err_reader = thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr.read_to_string(&mut buf);
            buf
        });

        let start = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if start.elapsed() >= self.timeout => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(Error::External(format!(
                        "`{}` timed out after {:?}",
                        self.command, self.timeout
                    )));
                }
                Ok(None) => thread::sleep(Duration::from_millis(2)),
                Err(e) => return Err(Error::External(format!("waiting for child failed: {e}"))),
            }
        };
        let _ = writer.join();
        let output = reader
            .join()
            .map_err(|_| Error::External("stdout reader panicked".into()))?
            .map_err(|e| Error::External(format!("reading child output failed: {e}")))?;
        let diagnostics = err_reader.join().unwrap_or_default();

        if !status.success() {
            return Err(Error::External(format!(
                "`{}` exited with {status}; stderr: {}",
                self.command,
                diagnostics.trim()
            )));
        }
        if output.len() != expected {
            return Err(Error::External(format!(
                "protocol violation: expected {expected} bytes ({h}x{w} f32), received {}",
                output.len()
            )));
        }
        let data = output
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        ImageGrid::from_vec(h, w, data)
            .map_err(|_| Error::External("child returned non-finite values".into()))
    }
}

/// Header line for a request.
pub fn header(height: usize, width: usize, sigma: f64) -> String {
    format!("IDBP1 {height} {width} {sigma}\n")
}

fn encode_request(z: &ImageGrid, sigma: f64) -> Vec<u8> {
    let head = header(z.height(), z.width(), sigma);
    let mut buf = Vec::with_capacity(head.len() + z.len() * 4);
    buf.extend_from_slice(head.as_bytes());
    for &v in z.data() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    buf
}

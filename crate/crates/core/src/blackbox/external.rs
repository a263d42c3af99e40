//! Line protocol over a child process's stdin/stdout.
//!
//! ```text
//! parent → child   HELLO <P>
//! child  → parent  READY
//! parent → child   <v1>,<v2>,...,<vP>      one line per row
//!                  ##END##
//! child  → parent  <score>                 one line per row, same order
//!                  ##END##
//! ```
//!
//! Floats are written with 17 significant digits. One request is in flight
//! per process; a predictor may own several processes and hands each batch
//! to whichever one is free.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use super::Predictor;
use crate::error::PredictorError;

pub const END_MARKER: &str = "##END##";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_BATCH_LIMIT: usize = 1000;

#[derive(Debug, Clone)]
pub struct ExternalOptions {
    /// Feature count announced in the handshake.
    pub dims: usize,
    /// Maximum rows per request.
    pub batch_limit: usize,
    /// Deadline for one request, handshake included.
    pub timeout: Duration,
    /// Number of model processes to start.
    pub processes: usize,
}

impl ExternalOptions {
    pub fn new(dims: usize) -> Self {
        Self {
            dims,
            batch_limit: DEFAULT_BATCH_LIMIT,
            timeout: DEFAULT_TIMEOUT,
            processes: 1,
        }
    }
}

/// Serializes a float with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

struct Channel {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    broken: bool,
}

impl Channel {
    fn start(argv: &[String], dims: usize, timeout: Duration) -> Result<Self, PredictorError> {
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(PredictorError::Spawn)?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut ch = Channel {
            child,
            stdin,
            lines: rx,
            broken: false,
        };
        ch.handshake(dims, timeout)?;
        Ok(ch)
    }

    fn handshake(&mut self, dims: usize, timeout: Duration) -> Result<(), PredictorError> {
        let deadline = Instant::now() + timeout;
        self.send(&format!("HELLO {dims}\n"))?;
        let reply = self.recv(deadline, timeout)?;
        if reply.trim() != "READY" {
            self.poison();
            return Err(PredictorError::Handshake(format!("expected READY, got {:?}", reply.trim())));
        }
        Ok(())
    }

    fn send(&mut self, payload: &str) -> Result<(), PredictorError> {
        let stdin = self.stdin.as_mut().ok_or(PredictorError::Exited)?;
        let res = stdin.write_all(payload.as_bytes()).and_then(|_| stdin.flush());
        if let Err(e) = res {
            self.poison();
            return Err(if e.kind() == std::io::ErrorKind::BrokenPipe {
                PredictorError::Exited
            } else {
                PredictorError::Io(e)
            });
        }
        Ok(())
    }

    fn recv(&mut self, deadline: Instant, timeout: Duration) -> Result<String, PredictorError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => {
                self.poison();
                Err(PredictorError::Io(e))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.poison();
                Err(PredictorError::Timeout(timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.poison();
                Err(PredictorError::Exited)
            }
        }
    }

    /// After any protocol error the stream position is unknown; the process
    /// is killed and the channel refuses further requests.
    fn poison(&mut self) {
        self.broken = true;
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn request(&mut self, points: &DMatrix<f64>, timeout: Duration) -> Result<Vec<f64>, PredictorError> {
        if self.broken {
            return Err(PredictorError::Exited);
        }
        let k = points.nrows();
        let mut payload = String::with_capacity(k * points.ncols() * 24 + 8);
        for i in 0..k {
            for j in 0..points.ncols() {
                if j > 0 {
                    payload.push(',');
                }
                payload.push_str(&format_value(points[(i, j)]));
            }
            payload.push('\n');
        }
        payload.push_str(END_MARKER);
        payload.push('\n');

        let deadline = Instant::now() + timeout;
        self.send(&payload)?;
        let mut out = Vec::with_capacity(k);
        loop {
            let line = self.recv(deadline, timeout)?;
            let line = line.trim();
            if line == END_MARKER {
                break;
            }
            if out.len() == k {
                self.poison();
                return Err(PredictorError::CountMismatch {
                    expected: k,
                    got: k + 1,
                });
            }
            match line.parse::<f64>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    let line_no = out.len() + 1;
                    let content = line.to_string();
                    self.poison();
                    return Err(PredictorError::Malformed {
                        line: line_no,
                        content,
                    });
                }
            }
        }
        if out.len() != k {
            return Err(PredictorError::CountMismatch {
                expected: k,
                got: out.len(),
            });
        }
        Ok(out)
    }
}

impl Drop for Channel {
    fn drop(&mut self) {
        // closing stdin asks the model to exit; give it a moment, then kill
        self.stdin = None;
        let start = Instant::now();
        while start.elapsed() < Duration::from_millis(500) {
            match self.child.try_wait() {
                Ok(Some(_)) | Err(_) => return,
                Ok(None) => thread::sleep(Duration::from_millis(5)),
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A model served by one or more child processes.
pub struct ExternalPredictor {
    argv: Vec<String>,
    options: ExternalOptions,
    channels: Vec<Mutex<Channel>>,
    next: AtomicUsize,
}

impl ExternalPredictor {
    pub fn spawn(argv: Vec<String>, options: ExternalOptions) -> Result<Self, PredictorError> {
        if argv.is_empty() {
            return Err(PredictorError::BadSpec {
                spec: String::new(),
                reason: "empty command".into(),
            });
        }
        if options.batch_limit == 0 || options.processes == 0 {
            return Err(PredictorError::BadSpec {
                spec: argv.join(" "),
                reason: "batch limit and process count must be positive".into(),
            });
        }
        let channels = (0..options.processes)
            .map(|_| Channel::start(&argv, options.dims, options.timeout).map(Mutex::new))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            argv,
            options,
            channels,
            next: AtomicUsize::new(0),
        })
    }

    fn acquire(&self) -> MutexGuard<'_, Channel> {
        for ch in &self.channels {
            if let Ok(guard) = ch.try_lock() {
                return guard;
            }
        }
        let i = self.next.fetch_add(1, Ordering::Relaxed) % self.channels.len();
        self.channels[i].lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl Predictor for ExternalPredictor {
    fn dims(&self) -> Option<usize> {
        Some(self.options.dims)
    }

    fn predict_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>, PredictorError> {
        let mut out = Vec::with_capacity(points.nrows());
        let mut start = 0;
        while start < points.nrows() {
            let len = self.options.batch_limit.min(points.nrows() - start);
            let chunk = points.rows(start, len).into_owned();
            let mut ch = self.acquire();
            out.extend(ch.request(&chunk, self.options.timeout)?);
            start += len;
        }
        Ok(out)
    }

    fn descriptor(&self) -> String {
        format!("cmd:{}", self.argv.join(" "))
    }
}

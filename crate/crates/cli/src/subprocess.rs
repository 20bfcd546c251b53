//! External evaluator spoken to over pipes: one line of p decimals out, one
//! line of q decimals back. The child is spawned once and persists for the
//! whole run.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use osfd_core::engine::Evaluator;
use osfd_core::{Error, Point, Result};

use crate::design_io::format_value;
use crate::error::{CliError, CliResult};

pub struct SubprocessEvaluator {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    p: usize,
    q: usize,
    command: String,
}

impl SubprocessEvaluator {
    pub fn spawn(command: &str, p: usize, q: usize) -> CliResult<SubprocessEvaluator> {
        if p == 0 || q == 0 {
            return Err(CliError::Config("dimensions must be at least 1".into()));
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| CliError::Evaluator(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout was piped"));
        Ok(SubprocessEvaluator {
            child,
            stdin,
            stdout,
            p,
            q,
            command: command.to_string(),
        })
    }

    fn exchange(&mut self, x: &Point) -> Result<Point> {
        let line: Vec<String> = x.iter().map(|&v| format_value(v)).collect();
        writeln!(self.stdin, "{}", line.join(" "))
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Evaluator(format!("`{}` stopped reading: {e}", self.command)))?;
        let mut reply = String::new();
        let read = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Evaluator(format!("`{}` read failed: {e}", self.command)))?;
        if read == 0 {
            return Err(Error::Evaluator(format!(
                "`{}` closed its output stream",
                self.command
            )));
        }
        let mut values = Vec::with_capacity(self.q);
        for field in reply.split_whitespace() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Evaluator(format!(
                    "`{}` wrote `{field}`, which is not a number",
                    self.command
                ))
            })?;
            values.push(v);
        }
        if values.len() != self.q {
            return Err(Error::Evaluator(format!(
                "`{}` wrote {} values, expected {}",
                self.command,
                values.len(),
                self.q
            )));
        }
        // Non-finite values pass through; the engine rejects them and the
        // run ends as an evaluator failure with the design built so far.
        Ok(Point::from(values))
    }
}

impl Evaluator for SubprocessEvaluator {
    fn input_dim(&self) -> usize {
        self.p
    }

    fn output_dim(&self) -> usize {
        self.q
    }

    fn evaluate(&mut self, x: &Point) -> Result<Point> {
        self.exchange(x)
    }
}

impl Drop for SubprocessEvaluator {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

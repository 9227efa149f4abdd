//! Single-dash flag parsing: `-name value`, `-name=value`, or `--name`.
//!
//! Commands pull out the flags they know with [`Flags::take`]; anything
//! left over afterwards is an unknown flag and `finish` reports it, so
//! typos fail loudly instead of being silently ignored.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

#[derive(Debug)]
pub struct Flags {
    values: BTreeMap<String, String>,
    pub positional: Vec<String>,
}

impl Flags {
    /// `boolean` lists the flags that take no value (e.g. `sequential`).
    pub fn parse(args: &[String], boolean: &[&str]) -> Result<Flags, String> {
        let mut values = BTreeMap::new();
        let mut positional = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let name = match arg.strip_prefix("--").or_else(|| arg.strip_prefix('-')) {
                Some(n) if !n.is_empty() => n,
                _ => {
                    positional.push(arg.clone());
                    continue;
                }
            };
            let (name, value) = match name.split_once('=') {
                Some((n, v)) => (n.to_string(), v.to_string()),
                None if boolean.contains(&name) => (name.to_string(), "true".to_string()),
                None => match it.next() {
                    Some(v) => (name.to_string(), v.clone()),
                    None => return Err(format!("flag -{name} needs a value")),
                },
            };
            if values.insert(name.clone(), value).is_some() {
                return Err(format!("flag -{name} given twice"));
            }
        }
        Ok(Flags { values, positional })
    }

    pub fn take(&mut self, name: &str) -> Option<String> {
        self.values.remove(name)
    }

    /// Removes and parses a flag, or yields the default when absent.
    pub fn take_as<T>(&mut self, name: &str, default: T) -> Result<T, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.take(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| format!("flag -{name}: bad value `{v}`: {e}")),
        }
    }

    /// Errors on any flag nobody claimed.
    pub fn finish(self) -> Result<Vec<String>, String> {
        if let Some(name) = self.values.keys().next() {
            return Err(format!("unknown flag -{name}"));
        }
        Ok(self.positional)
    }
}

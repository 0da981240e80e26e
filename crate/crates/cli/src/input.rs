use std::fs;
use std::path::Path;

use relbound::theta::ConfusabilityGraph;
use relbound::{CQChannel, Channel, ClassicalChannel};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Channel(Channel),
    Graph(ConfusabilityGraph),
}

/// Channel JSON when the file starts with `{`, edge list otherwise.
pub fn parse_inputs(path: &Path) -> Result<Input, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_text(&text).map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

pub fn parse_text(text: &str) -> relbound::Result<Input> {
    if text.trim_start().starts_with('{') {
        Channel::from_json(text).map(Input::Channel)
    } else {
        ConfusabilityGraph::from_edge_list(text).map(Input::Graph)
    }
}

impl Input {
    pub fn channel(&self) -> Result<CQChannel, CliError> {
        match self {
            Input::Channel(c) => Ok(c.to_cq()),
            Input::Graph(_) => Err(CliError::Usage("this command needs a channel file, not a graph".into())),
        }
    }

    pub fn classical(&self) -> Option<&ClassicalChannel> {
        match self {
            Input::Channel(Channel::Classical(w)) => Some(w),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_json() {
        let Input::Channel(Channel::Classical(w)) =
            parse_text(r#"{"type":"classical","W":[[0.9,0.1],[0.1,0.9]]}"#).unwrap()
        else {
            panic!("expected a classical channel");
        };
        assert_eq!((w.inputs(), w.outputs()), (2, 2));
    }

    #[test]
    fn pentagon_edge_list() {
        let Input::Graph(g) = parse_text("# C5\n5\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap() else {
            panic!("expected a graph");
        };
        assert_eq!((g.n(), g.edge_count()), (5, 5));
    }

    #[test]
    fn substochastic_row_is_rejected() {
        let err = parse_text(r#"{"type":"classical","W":[[0.9,0.08],[0.1,0.9]]}"#).unwrap_err();
        assert!(matches!(err, relbound::Error::RowNotStochastic { row: 0, .. }), "{err:?}");
    }
}

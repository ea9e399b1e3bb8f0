use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kg::ChartType;

/// Chart element roles shared by annotations and detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Title,
    XAxisTitle,
    YAxisTitle,
    LegendTitle,
    XAxisLabel,
    YAxisLabel,
    LegendLabel,
    LegendMark,
    Mark,
    PlotArea,
    Unknown,
}

impl Role {
    pub const ALL: [Role; 11] = [
        Role::Title,
        Role::XAxisTitle,
        Role::YAxisTitle,
        Role::LegendTitle,
        Role::XAxisLabel,
        Role::YAxisLabel,
        Role::LegendLabel,
        Role::LegendMark,
        Role::Mark,
        Role::PlotArea,
        Role::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Title => "title",
            Role::XAxisTitle => "x-axis-title",
            Role::YAxisTitle => "y-axis-title",
            Role::LegendTitle => "legend-title",
            Role::XAxisLabel => "x-axis-label",
            Role::YAxisLabel => "y-axis-label",
            Role::LegendLabel => "legend-label",
            Role::LegendMark => "legend-mark",
            Role::Mark => "mark",
            Role::PlotArea => "plot-area",
            Role::Unknown => "unknown",
        }
    }

    pub fn is_text(self) -> bool {
        matches!(
            self,
            Role::Title
                | Role::XAxisTitle
                | Role::YAxisTitle
                | Role::LegendTitle
                | Role::XAxisLabel
                | Role::YAxisLabel
                | Role::LegendLabel
        )
    }

    /// Text roles that name a data variable.
    pub fn is_variable_text(self) -> bool {
        matches!(
            self,
            Role::Title | Role::XAxisTitle | Role::YAxisTitle | Role::LegendTitle
        )
    }

    /// Text roles that carry a data variable value.
    pub fn is_value_text(self) -> bool {
        matches!(
            self,
            Role::XAxisLabel | Role::YAxisLabel | Role::LegendLabel
        )
    }

    /// Evaluation class in the element-recognition report: marks split by
    /// chart type, the legend pieces pooled.
    pub fn eval_class(self, chart_type: ChartType) -> &'static str {
        match self {
            Role::Mark => match chart_type {
                ChartType::Bar => "bar",
                ChartType::Line => "line",
                ChartType::Pie => "pie",
                ChartType::Scatter => "point",
            },
            Role::LegendTitle | Role::LegendLabel | Role::LegendMark => "legend",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

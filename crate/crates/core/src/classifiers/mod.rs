//! The ten classifiers evaluated by the pipeline, all trained on the
//! normalized selected-gene matrix and exposing the shared predict
//! contract of [`crate::model::Model`].

pub mod bayes_net;
pub mod decision_table;
pub mod forest;
pub mod ga;
pub mod lmt;
pub mod logitboost;
pub mod mlp;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

pub use bayes_net::{train_bayes_net, BayesNetModel, BayesNetParams};
pub use decision_table::{train_decision_table, DecisionTableModel, DecisionTableParams};
pub use forest::{train_random_forest, RandomForestModel, RandomForestParams};
pub use ga::{train_ga, GaModel, GaParams};
pub use lmt::{train_lmt, LmtModel, LmtParams};
pub use logitboost::{train_logitboost, LogitBoostModel, LogitBoostParams};
pub use mlp::{train_mlp, MlpModel, MlpParams};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel, NaiveBayesParams};
pub use svm::{train_smo_svm, SvmModel, SvmParams};
pub use tree::{entropy, train_c45, C45Params, DecisionTreeModel};

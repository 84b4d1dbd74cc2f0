//! Thin blocking client for the pose-and-size estimation service.

pub mod protocol;

use protocol::*;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("{message}")]
    Api { kind: ErrorKind, message: String },
    #[error("unexpected response ({status}): {body}")]
    UnexpectedResponse { status: u16, body: String },
}

impl ClientError {
    pub fn kind(&self) -> Option<ErrorKind> {
        match self {
            ClientError::Api { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

pub type ClientResult<T> = Result<T, ClientError>;

/// Blocking HTTP client bound to one service base URL.
pub struct Client {
    http: reqwest::blocking::Client,
    base_url: String,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let mut base_url = base_url.into();
        while base_url.ends_with('/') {
            base_url.pop();
        }
        Client { http: reqwest::blocking::Client::new(), base_url }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn post<Req: serde::Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> ClientResult<Resp> {
        let response =
            self.http.post(format!("{}{path}", self.base_url)).json(request).send()?;
        Self::decode(response)
    }

    fn get<Resp: serde::de::DeserializeOwned>(&self, path: &str) -> ClientResult<Resp> {
        let response = self.http.get(format!("{}{path}", self.base_url)).send()?;
        Self::decode(response)
    }

    fn decode<Resp: serde::de::DeserializeOwned>(
        response: reqwest::blocking::Response,
    ) -> ClientResult<Resp> {
        let status = response.status();
        if status.is_success() {
            return Ok(response.json()?);
        }
        let body = response.text().unwrap_or_default();
        match serde_json::from_str::<ErrorBody>(&body) {
            Ok(err) => Err(ClientError::Api { kind: err.kind, message: err.message }),
            Err(_) => Err(ClientError::UnexpectedResponse { status: status.as_u16(), body }),
        }
    }

    pub fn health(&self) -> ClientResult<HealthResponse> {
        self.get("/api/health")
    }

    pub fn fit(&self, request: &FitRequest) -> ClientResult<FitResponse> {
        self.post("/api/fit", request)
    }

    pub fn map_rot(&self, request: &MapRotRequest) -> ClientResult<MapRotResponse> {
        self.post("/api/map-rot", request)
    }

    pub fn losses(&self, request: &LossesRequest) -> ClientResult<LossesResponse> {
        self.post("/api/losses", request)
    }

    pub fn eval(&self, request: &EvalRequest) -> ClientResult<EvalResponse> {
        self.post("/api/eval", request)
    }

    pub fn synth(&self, request: &SynthRequest) -> ClientResult<SynthResponse> {
        self.post("/api/synth", request)
    }

    pub fn perturb(&self, request: &PerturbRequest) -> ClientResult<PerturbResponse> {
        self.post("/api/perturb", request)
    }

    pub fn symmetry_table(&self) -> ClientResult<SymmetryTableResponse> {
        self.get("/api/symmetry-table")
    }
}

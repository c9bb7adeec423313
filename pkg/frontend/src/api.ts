/** Typed client for the findesk session service. Every value the UI shows
 * comes straight out of these response bodies; the client never derives or
 * recomputes numbers. */

export interface CreateSessionResponse {
  session_id: string
  cursor: string
}

export interface ProfileResponse {
  kind: string
  buy_fraction: number
  sell_fraction: number
}

export interface SignalView {
  agent: string
  date: string
  trend: 'Up' | 'Down'
  confidence: number | null
  rationale: string
  provenance: string[]
}

export interface SignalsResponse {
  origin: string
  target: string
  signals: Record<string, SignalView | null>
  intermediates: {
    seasonal: { per_period: Record<string, string>; summary: string } | null
    review: { review: string; stages: [string, string][] } | null
  }
}

export interface DecisionResponse {
  date: string
  prediction: 'Up' | 'Down'
  action: 'Buy' | 'Sell' | 'Hold'
  score: number
  rationale: string
  weights: Record<string, number>
}

export interface FeedbackResponse {
  weights: Record<string, number>
  history_length: number
}

export interface AdvanceResponse {
  cursor: string
  cash: number
  shares: number
  equity: number
  trade: { side: string; shares: number; price: number } | null
}

export interface EquityResponse {
  points: [string, number][]
}

export interface ApiError {
  code: string
  message: string
}

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`)
  }
}

async function request<T>(base: string, method: string, path: string, body?: unknown): Promise<T> {
  const response = await fetch(base + path, {
    method,
    headers: { 'Content-Type': 'application/json' },
    body: body === undefined ? undefined : JSON.stringify(body),
  })
  const parsed = await response.json()
  if (!response.ok || (parsed && typeof parsed.code === 'string' && typeof parsed.message === 'string')) {
    throw new ApiRequestError(response.status, parsed as ApiError)
  }
  return parsed as T
}

export class SessionApi {
  constructor(readonly base: string = '') {}

  createSession(ticker: string, startDate?: string): Promise<CreateSessionResponse> {
    return request(this.base, 'POST', '/sessions', { ticker, start_date: startDate })
  }

  setPreference(sid: string, text: string): Promise<ProfileResponse> {
    return request(this.base, 'PUT', `/sessions/${sid}/preference`, { text })
  }

  getSignals(sid: string): Promise<SignalsResponse> {
    return request(this.base, 'GET', `/sessions/${sid}/signals`)
  }

  decide(sid: string, attitude?: string): Promise<DecisionResponse> {
    return request(this.base, 'POST', `/sessions/${sid}/decide`, { attitude: attitude ?? null })
  }

  sendFeedback(sid: string, feedback: string): Promise<FeedbackResponse> {
    return request(this.base, 'POST', `/sessions/${sid}/feedback`, { feedback })
  }

  advance(sid: string): Promise<AdvanceResponse> {
    return request(this.base, 'POST', `/sessions/${sid}/advance`)
  }

  getEquity(sid: string): Promise<EquityResponse> {
    return request(this.base, 'GET', `/sessions/${sid}/equity`)
  }
}

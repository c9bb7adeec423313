/** Session view-model: a plain record of the latest server responses.
 *
 * Invariant: the rendered state always reflects the last server response.
 * Reducers here only copy fields out of response bodies — no arithmetic, no
 * extrapolation. */
import type {
  AdvanceResponse,
  ApiError,
  DecisionResponse,
  EquityResponse,
  FeedbackResponse,
  ProfileResponse,
  SignalsResponse,
} from './api'

export interface SessionView {
  sessionId: string | null
  cursor: string | null
  profile: ProfileResponse | null
  signals: SignalsResponse | null
  decision: DecisionResponse | null
  weights: Record<string, number> | null
  equityPoints: [string, number][]
  error: ApiError | null
  busy: boolean
}

export function initialView(): SessionView {
  return {
    sessionId: null,
    cursor: null,
    profile: null,
    signals: null,
    decision: null,
    weights: null,
    equityPoints: [],
    error: null,
    busy: false,
  }
}

export function withSession(view: SessionView, sid: string, cursor: string): SessionView {
  return { ...initialView(), sessionId: sid, cursor }
}

export function withProfile(view: SessionView, profile: ProfileResponse): SessionView {
  return { ...view, profile, error: null }
}

export function withSignals(view: SessionView, signals: SignalsResponse): SessionView {
  return { ...view, signals, error: null }
}

export function withDecision(view: SessionView, decision: DecisionResponse): SessionView {
  return { ...view, decision, weights: decision.weights, error: null }
}

export function withFeedback(view: SessionView, feedback: FeedbackResponse): SessionView {
  return { ...view, weights: feedback.weights, error: null }
}

export function withAdvance(view: SessionView, advance: AdvanceResponse): SessionView {
  // the decision was consumed server-side; equity arrives via getEquity
  return { ...view, cursor: advance.cursor, decision: null, error: null }
}

export function withEquity(view: SessionView, equity: EquityResponse): SessionView {
  return { ...view, equityPoints: equity.points, error: null }
}

export function withError(view: SessionView, error: ApiError): SessionView {
  return { ...view, error }
}

/** Decision controls stay blocked until the server accepted a preference
 * (the client-side mirror of the service's 403 rule). */
export function canDecide(view: SessionView): boolean {
  return view.sessionId !== null && view.profile !== null && !view.busy
}

export function canAdvance(view: SessionView): boolean {
  return view.decision !== null && !view.busy
}

export function canGiveFeedback(view: SessionView): boolean {
  return view.decision !== null && !view.busy
}
